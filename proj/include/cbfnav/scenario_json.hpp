#pragma once

#include <iosfwd>
#include <string>

#include "cbfnav/types.hpp"

namespace cbfnav {

// Scenario files are strict JSON:
// {
//   "agents": [{"id": 0, "start": [x, y], "goal": [x, y], "radius": 0.15}, ...],
//   "obstacles": [{"id": 0, "center": [x, y], "radius": 0.5}, ...],
//   "sensing_radius": 2.0, "dt": 0.05, "max_steps": 500, "u_max": 0.5,
//   "workspace": {"min": [x, y], "max": [x, y]}
// }
// Unknown keys, missing keys, and wrong shapes raise ConfigError.
WorldConfig scenario_from_json(const std::string& text);
WorldConfig load_scenario(const std::string& path);

// Canonical serialization: fixed key order, shortest round-trip numbers.
// Identical configs produce identical bytes.
std::string scenario_to_json(const WorldConfig& config);
void save_scenario(const std::string& path, const WorldConfig& config);

// FNV-1a 64 over the canonical serialization, as 16 hex digits.
std::string scenario_hash(const WorldConfig& config);

}  // namespace cbfnav
