#include "cbfnav/scenarios.hpp"

#include <cmath>

#include "cbfnav/rng.hpp"

namespace cbfnav {

namespace {

constexpr double kAgentRadius = 0.15;
constexpr double kObstacleRadius = 0.5;
constexpr double kStartMargin = 0.1;
constexpr double kGoalMargin = 0.2;

double spread(int k, int n, double lo, double hi) {
  if (n <= 1) return 0.5 * (lo + hi);
  return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
}

// Margin checks beyond validate_config: starts keep a little slack and goal
// regions stay clear of obstacles and of each other so arrival snaps are safe.
bool well_separated(const WorldConfig& c) {
  for (std::size_t i = 0; i < c.agents.size(); ++i) {
    const auto& a = c.agents[i];
    for (std::size_t j = i + 1; j < c.agents.size(); ++j) {
      const auto& b = c.agents[j];
      if (pairwise_clearance(a.start, a.radius, b.start, b.radius) < kStartMargin)
        return false;
      if (pairwise_clearance(a.goal, a.radius, b.goal, b.radius) < kGoalMargin)
        return false;
    }
    for (const auto& o : c.obstacles) {
      if (pairwise_clearance(a.start, a.radius, o.center, o.radius) < kStartMargin)
        return false;
      if (pairwise_clearance(a.goal, a.radius, o.center, o.radius) < kGoalMargin)
        return false;
    }
  }
  return true;
}

using Builder = WorldConfig (*)(const ScenarioSpec&, Rng&);

WorldConfig build_proof_of_concept(const ScenarioSpec& spec, Rng& rng) {
  WorldConfig c;
  c.workspace = {{-5.0, -5.0}, {5.0, 5.0}};
  for (int k = 0; k < spec.obstacles; ++k) {
    ObstacleSpec o;
    o.id = k;
    // A tight obstacle row with ~0.7 m doors brackets the columns where
    // swapped pairs cross; pairs thread a door together, so a leading agent
    // can be pressed against a jamb while its partner closes in.
    o.center = Vec2(spread(k, spec.obstacles, -2.5, 2.5) + rng.uniform(-0.15, 0.15),
                    rng.uniform(-0.15, 0.15));
    o.radius = kObstacleRadius;
    c.obstacles.push_back(o);
  }
  for (int k = 0; k < spec.agents; ++k) {
    AgentSpec a;
    a.id = k;
    a.radius = kAgentRadius;
    // Odd columns start lower so swapped pairs thread the obstacle row one
    // after the other instead of meeting head on at the same altitude.
    const double stagger = (k % 2 == 1) ? -0.9 : 0.0;
    a.start = Vec2(spread(k, spec.agents, -3.0, 3.0) + rng.uniform(-0.5, 0.5),
                   rng.uniform(1.8, 2.4) + stagger);
    // Adjacent columns swap goals so pairs cross near the obstacle row;
    // that funnels two agents into the same gap and keeps the scenario
    // interesting without the full-width crossings of Cross. The course is
    // kept short: the arrival radius is tiny and the CLF slack makes the
    // last ~0.15 m cost ~200 steps.
    const int column = k ^ 1;
    a.goal = Vec2(spread(column, spec.agents, -3.0, 3.0) + rng.uniform(-1.0, 1.0),
                  rng.uniform(-2.4, -1.8));
    c.agents.push_back(a);
  }
  return c;
}

WorldConfig build_narrow_passage(const ScenarioSpec& spec, Rng& rng) {
  WorldConfig c;
  c.workspace = {{-5.0, -5.0}, {5.0, 5.0}};
  const double offset = kObstacleRadius + 0.5 * spec.passage_width;
  c.obstacles.push_back({0, Vec2(0.0, offset), kObstacleRadius});
  c.obstacles.push_back({1, Vec2(0.0, -offset), kObstacleRadius});
  for (int k = 0; k < spec.agents; ++k) {
    AgentSpec a;
    a.id = k;
    a.radius = kAgentRadius;
    a.start = Vec2(rng.uniform(-3.5, -2.5),
                   spread(k, spec.agents, -1.8, 1.8) + rng.uniform(-0.2, 0.2));
    a.goal = Vec2(rng.uniform(2.5, 3.5),
                  spread(spec.agents - 1 - k, spec.agents, -1.8, 1.8) +
                      rng.uniform(-0.2, 0.2));
    c.agents.push_back(a);
  }
  return c;
}

WorldConfig build_cross(const ScenarioSpec& spec, Rng& rng) {
  WorldConfig c;
  c.workspace = {{-5.0, -5.0}, {5.0, 5.0}};
  const double radius = 3.0;
  for (int k = 0; k < spec.agents; ++k) {
    double angle = 2.0 * M_PI * k / spec.agents + rng.uniform(-0.08, 0.08);
    AgentSpec a;
    a.id = k;
    a.radius = kAgentRadius;
    a.start = radius * Vec2(std::cos(angle), std::sin(angle));
    a.goal = -a.start;  // diametrically opposite
    c.agents.push_back(a);
  }
  return c;
}

WorldConfig build_singularity(const ScenarioSpec&, Rng&) {
  WorldConfig c;
  c.workspace = {{-1.0, -3.0}, {5.0, 3.0}};
  c.agents.push_back({0, Vec2(0.0, 0.0), Vec2(4.0, 0.0), kAgentRadius});
  c.obstacles.push_back({0, Vec2(2.0, 0.0), kObstacleRadius});
  return c;
}

WorldConfig build_generalization8(const ScenarioSpec& spec, Rng& rng) {
  WorldConfig c;
  c.workspace = {{-6.0, -6.0}, {6.0, 6.0}};
  c.max_steps = 750;
  int id = 0;
  for (int row = 0; row < 2; ++row) {
    for (int col = 0; col < 4; ++col) {
      ObstacleSpec o;
      o.id = id++;
      o.center = Vec2(spread(col, 4, -4.5, 4.5) + rng.uniform(-spec.shift, spec.shift),
                      (row == 0 ? -1.2 : 1.2) + rng.uniform(-spec.shift, spec.shift));
      o.radius = kObstacleRadius;
      c.obstacles.push_back(o);
    }
  }
  for (int k = 0; k < spec.agents; ++k) {
    AgentSpec a;
    a.id = k;
    a.radius = kAgentRadius;
    a.start = Vec2(spread(k, spec.agents, -4.0, 4.0) + rng.uniform(-spec.shift, spec.shift),
                   rng.uniform(3.5, 4.8));
    a.goal = Vec2(spread(spec.agents - 1 - k, spec.agents, -4.0, 4.0) +
                      rng.uniform(-spec.shift, spec.shift),
                  rng.uniform(-4.8, -3.5));
    c.agents.push_back(a);
  }
  return c;
}

Builder builder_for(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::ProofOfConcept: return build_proof_of_concept;
    case ScenarioKind::NarrowPassage: return build_narrow_passage;
    case ScenarioKind::Cross: return build_cross;
    case ScenarioKind::Singularity: return build_singularity;
    case ScenarioKind::Generalization8: return build_generalization8;
  }
  throw ConfigError("unknown scenario kind");
}

}  // namespace

WorldConfig make_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  Builder build = builder_for(spec.kind);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Rng rng(Rng::derive(seed, {0x5ce4a71cULL, static_cast<std::uint64_t>(attempt)}));
    WorldConfig config = build(spec, rng);
    if (validate_config(config).empty() && well_separated(config)) return config;
  }
  throw ConfigError("scenario generation failed for kind " +
                    scenario_kind_name(spec.kind));
}

ScenarioSpec default_spec(ScenarioKind kind) {
  ScenarioSpec spec;
  spec.kind = kind;
  if (kind == ScenarioKind::Generalization8) spec.obstacles = 8;
  if (kind == ScenarioKind::Singularity) {
    spec.agents = 1;
    spec.obstacles = 1;
  }
  return spec;
}

WorldConfig make_scenario(ScenarioKind kind, std::uint64_t seed) {
  return make_scenario(default_spec(kind), seed);
}

std::optional<ScenarioKind> parse_scenario_kind(std::string_view name) {
  if (name == "proof_of_concept") return ScenarioKind::ProofOfConcept;
  if (name == "narrow_passage") return ScenarioKind::NarrowPassage;
  if (name == "cross") return ScenarioKind::Cross;
  if (name == "singularity") return ScenarioKind::Singularity;
  if (name == "generalization8") return ScenarioKind::Generalization8;
  return std::nullopt;
}

std::string scenario_kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::ProofOfConcept: return "proof_of_concept";
    case ScenarioKind::NarrowPassage: return "narrow_passage";
    case ScenarioKind::Cross: return "cross";
    case ScenarioKind::Singularity: return "singularity";
    case ScenarioKind::Generalization8: return "generalization8";
  }
  return "unknown";
}

}  // namespace cbfnav
