#include <vector>

#include "cbfnav/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cbfnav::run_cli(args);
}
