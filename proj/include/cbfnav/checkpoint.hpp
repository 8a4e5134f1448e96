#pragma once

#include <string>
#include <vector>

#include "cbfnav/policy.hpp"

namespace cbfnav {

// Binary policy checkpoints: 8 magic bytes, a format version, the
// architecture descriptor (widths of the three message/update nets and the
// action bounds), then the flat parameter vector as little-endian 64-bit
// floats. Round-trips are bit-exact.
struct Checkpoint {
  GnnArch arch;
  ParamBounds bounds;
  std::vector<double> theta;
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cbfnav
