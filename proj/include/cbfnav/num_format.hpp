#pragma once

#include <charconv>
#include <string>

namespace cbfnav {

// Shortest round-trip decimal form; the same bits always print the same
// bytes, which underpins the file-level determinism guarantees.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace cbfnav
