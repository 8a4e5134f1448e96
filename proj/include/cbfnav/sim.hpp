#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbfnav/controller.hpp"
#include "cbfnav/reward.hpp"
#include "cbfnav/types.hpp"

namespace cbfnav {

// Agents closer to their goal than this snap onto it and stay there.
inline constexpr double kArrivalRadius = 0.05;

struct WorldState {
  int t = 0;
  std::vector<AgentState> agents;
  std::vector<char> done;
};

// Initial state from the scenario; agents starting within the arrival radius
// are immediately done (and snapped to the goal).
WorldState initial_state(const WorldConfig& config);

// Closed-ball neighborhood of agent `agent_index` (by position in
// config.agents): every other agent and obstacle whose center is within
// sensing_radius, sorted by ascending id.
LocalView neighbors(const WorldConfig& config, const WorldState& state,
                    int agent_index);

// Synchronous Euler update p += u * dt for non-done agents; the velocity
// cache becomes the applied control (zero for done agents). Controls must
// respect |u|_inf <= u_max (ContractViolation otherwise). Arrival flags are
// evaluated after the update.
void step(WorldState& state, const WorldConfig& config,
          const std::vector<Vec2>& controls);

// Per-step CbfParams source. Implementations must be safe to call for
// different agents concurrently; randomized policies derive their draws from
// (episode_seed, t, agent id) so results never depend on evaluation order.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual CbfParams act(const LocalView& view, int t,
                        std::uint64_t episode_seed) const = 0;
};

struct AgentStepRecord {
  Vec2 position{0.0, 0.0};  // before the update
  Vec2 control{0.0, 0.0};   // applied control
  CbfParams params;         // parameters used by the QP this step
  bool feasible = true;
  bool done = false;  // already at goal when the step began
  double reward = 0.0;
};

struct StepRecord {
  int t = 0;
  std::vector<AgentStepRecord> agents;
};

struct Trajectory {
  std::uint64_t seed = 0;
  std::string scenario_hash;
  std::vector<StepRecord> steps;       // one entry per executed step
  std::vector<Vec2> final_positions;
  std::vector<char> arrived;           // done flags at episode end
  std::string violation;               // non-empty if the episode aborted

  bool all_arrived() const;
  int infeasible_steps() const;  // agent-steps with an infeasible QP
};

struct EpisodeOptions {
  ControllerConfig controller;
  RewardConfig reward;
  int jobs = 1;  // parallelism of the per-agent control loop
};

// Runs until all agents arrive or max_steps elapse. A negative barrier at a
// step boundary aborts the episode and records the violating pair in
// Trajectory::violation. Identical (scenario, seed) yield identical
// trajectories for any jobs value.
Trajectory run_episode(const WorldConfig& scenario, const Policy& policy,
                       std::uint64_t seed, const EpisodeOptions& options = {});

struct SeparationViolation {
  int t = 0;  // steps.size() means the final positions
  bool obstacle = false;
  int a = 0;  // agent id
  int b = 0;  // other agent id, or obstacle id
  double separation = 0.0;
  double required = 0.0;
};

// Flags recorded states where separation < R_a + R_b - tol. The default
// tolerance 2 * u_max * dt allows exactly one step of mutual closing motion
// between samples.
std::vector<SeparationViolation> check_safety(const Trajectory& trajectory,
                                              const WorldConfig& config,
                                              double tol);
std::vector<SeparationViolation> check_safety(const Trajectory& trajectory,
                                              const WorldConfig& config);

}  // namespace cbfnav
