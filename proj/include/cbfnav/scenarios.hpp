#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "cbfnav/types.hpp"

namespace cbfnav {

enum class ScenarioKind {
  ProofOfConcept,   // 4 agents crossing a jittered obstacle row
  NarrowPassage,    // two obstacles forming a sub-diameter gap
  Cross,            // agents on a circle with diametrically opposite goals
  Singularity,      // start, obstacle, and goal exactly collinear
  Generalization8,  // 8 obstacles, longer horizon, seed-shifted layout
};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::ProofOfConcept;
  int agents = 4;
  int obstacles = 4;           // ProofOfConcept only; Generalization8 uses 8
  double passage_width = 0.5;  // NarrowPassage edge-to-edge gap
  double shift = 0.5;          // Generalization8 uniform shift magnitude
};

// Seed-driven generator; resamples until validate_config passes and goal
// regions keep a 0.2 m clearance margin (so arrival snaps cannot breach a
// barrier). Identical (spec, seed) produce identical configs.
WorldConfig make_scenario(const ScenarioSpec& spec, std::uint64_t seed);
WorldConfig make_scenario(ScenarioKind kind, std::uint64_t seed);

// Kind defaults: Generalization8 carries 8 obstacles, Singularity a single
// agent and obstacle.
ScenarioSpec default_spec(ScenarioKind kind);

std::optional<ScenarioKind> parse_scenario_kind(std::string_view name);
std::string scenario_kind_name(ScenarioKind kind);

}  // namespace cbfnav
