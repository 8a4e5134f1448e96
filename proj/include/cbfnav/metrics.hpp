#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cbfnav/scenarios.hpp"
#include "cbfnav/sim.hpp"

namespace cbfnav {

// Top speed reachable under the per-axis control box.
inline double reference_speed(double u_max) { return u_max * 1.4142135623730951; }

struct SplEntry {
  bool success = false;
  double shortest = 0.0;  // straight-line start to goal distance
  double actual = 0.0;    // recorded path length
};

// Mean over entries of success * shortest / max(actual, shortest). An entry
// with shortest <= 0 (agent spawned at its goal) counts its success flag
// directly.
double spl(std::span<const SplEntry> entries);

// Mean pre-arrival speed of one agent divided by v_ref; 0 when the agent
// never took a step. Pre-arrival means every record up to and including the
// arriving one.
double pct_speed(const Trajectory& trajectory, int agent_index, double v_ref);

struct AgentMetrics {
  int id = 0;
  bool success = false;
  double path_length = 0.0;
  double straight_line_length = 0.0;
  double mean_speed = 0.0;
};

struct EpisodeMetrics {
  std::vector<AgentMetrics> agents;
  double spl = 0.0;
  double pct_speed = 0.0;
  double success_rate = 0.0;
  int episode_steps = 0;
  int infeasible_steps = 0;
  bool all_arrived = false;
};

// Path lengths are polyline lengths over recorded positions including the
// final ones, so successful agents end exactly at the goal.
EpisodeMetrics episode_metrics(const Trajectory& trajectory,
                               const WorldConfig& config);

struct GridSpec {
  Interval zeta{0.1, 10.0};
  Interval eta{1.0, 2.0};
  int zeta_points = 10;
  int eta_points = 10;
};

// Inclusive endpoints; a single-point axis collapses to lo.
std::vector<double> grid_axis(const Interval& interval, int points);

struct GridRow {
  double zeta = 0.0;
  double eta = 0.0;
  double spl = 0.0;
  double pct_speed = 0.0;
  bool success = false;  // all agents arrived
  int infeasible_steps = 0;
};

// One deterministic episode per grid point, the same (zeta, eta) applied to
// agent and obstacle constraints alike. Rows come back sorted by SPL
// descending, then PCTSpeed descending, then zeta and eta ascending, so the
// first row is the best fixed-parameter baseline. Output is independent of
// jobs.
std::vector<GridRow> grid_search(const WorldConfig& scenario,
                                 const GridSpec& grid,
                                 const ControllerConfig& controller,
                                 std::uint64_t seed, int jobs = 1);

void write_grid_csv(std::ostream& out, const std::vector<GridRow>& rows);

// Produces the scenario for evaluation episode k; seed is pre-derived per
// episode so sources stay stateless.
using ScenarioSource = std::function<WorldConfig(int episode, std::uint64_t seed)>;

ScenarioSource family_source(const ScenarioSpec& spec);
ScenarioSource fixed_source(const WorldConfig& config);

struct EvalEpisode {
  int episode = 0;
  std::uint64_t scenario_seed = 0;
  std::uint64_t episode_seed = 0;
  double spl = 0.0;
  double pct_speed = 0.0;
  double success_rate = 0.0;
  int steps = 0;
  int infeasible_steps = 0;
  bool all_arrived = false;
};

struct Stat {
  double mean = 0.0;
  double std_dev = 0.0;  // population standard deviation
};

struct EvalSummary {
  int episodes = 0;
  Stat spl;
  Stat pct_speed;
  Stat success_rate;
  std::vector<EvalEpisode> records;
};

// Runs n episodes against seed-shifted scenarios from the source and
// aggregates the per-episode metrics. Deterministic given (policy, source,
// seed) and independent of jobs.
EvalSummary evaluate(const Policy& policy, const ScenarioSource& source,
                     int n_episodes, std::uint64_t seed,
                     const ControllerConfig& controller,
                     const RewardConfig& reward, int jobs = 1);

std::string eval_summary_json(const EvalSummary& summary);

}  // namespace cbfnav
