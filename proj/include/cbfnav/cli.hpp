#pragma once

#include <string>
#include <vector>

namespace cbfnav {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitTimeout = 2;
inline constexpr int kExitSafety = 3;
inline constexpr int kExitNonFinite = 4;

// The full command-line surface as a library call so tests can drive
// subcommands in process. args excludes the program name. Data outputs go to
// files named by --out; stdout carries one-line summaries only, and the
// CBFNAV_LOG environment variable (error|info|debug) gates stderr logging.
int run_cli(const std::vector<std::string>& args);

}  // namespace cbfnav
