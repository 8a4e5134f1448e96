#include "cbfnav/sim.hpp"

#include <algorithm>
#include <cmath>

#include "cbfnav/parallel.hpp"
#include "cbfnav/scenario_json.hpp"

namespace cbfnav {

bool Trajectory::all_arrived() const {
  return !arrived.empty() &&
         std::all_of(arrived.begin(), arrived.end(), [](char c) { return c != 0; });
}

int Trajectory::infeasible_steps() const {
  int count = 0;
  for (const auto& s : steps)
    for (const auto& a : s.agents)
      if (!a.done && !a.feasible) ++count;
  return count;
}

WorldState initial_state(const WorldConfig& config) {
  WorldState state;
  state.agents.resize(config.agents.size());
  state.done.resize(config.agents.size(), 0);
  for (std::size_t i = 0; i < config.agents.size(); ++i) {
    state.agents[i].position = config.agents[i].start;
    state.agents[i].velocity = Vec2(0.0, 0.0);
    if ((config.agents[i].start - config.agents[i].goal).norm() <= kArrivalRadius) {
      state.agents[i].position = config.agents[i].goal;
      state.done[i] = 1;
    }
  }
  return state;
}

LocalView neighbors(const WorldConfig& config, const WorldState& state,
                    int agent_index) {
  const auto& spec = config.agents[agent_index];
  const Vec2 p = state.agents[agent_index].position;

  LocalView view;
  view.self_id = spec.id;
  view.self = state.agents[agent_index];
  view.goal = spec.goal;
  view.self_radius = spec.radius;

  for (std::size_t j = 0; j < config.agents.size(); ++j) {
    if (static_cast<int>(j) == agent_index) continue;
    if ((state.agents[j].position - p).norm() <= config.sensing_radius)
      view.agents.push_back(
          {config.agents[j].id, state.agents[j], config.agents[j].radius});
  }
  for (const auto& o : config.obstacles) {
    if ((o.center - p).norm() <= config.sensing_radius)
      view.obstacles.push_back({o.id, o.center, o.radius});
  }
  std::sort(view.agents.begin(), view.agents.end(),
            [](const NeighborAgent& a, const NeighborAgent& b) { return a.id < b.id; });
  std::sort(view.obstacles.begin(), view.obstacles.end(),
            [](const NeighborObstacle& a, const NeighborObstacle& b) { return a.id < b.id; });
  return view;
}

void step(WorldState& state, const WorldConfig& config,
          const std::vector<Vec2>& controls) {
  if (controls.size() != state.agents.size())
    throw ContractViolation("control count differs from agent count");
  for (std::size_t i = 0; i < state.agents.size(); ++i) {
    if (state.done[i]) {
      state.agents[i].velocity = Vec2(0.0, 0.0);
      continue;
    }
    const Vec2& u = controls[i];
    if (std::abs(u.x()) > config.u_max + 1e-12 ||
        std::abs(u.y()) > config.u_max + 1e-12)
      throw ContractViolation("control outside the box");
    state.agents[i].position += u * config.dt;
    state.agents[i].velocity = u;
    if ((state.agents[i].position - config.agents[i].goal).norm() <= kArrivalRadius) {
      state.agents[i].position = config.agents[i].goal;
      state.agents[i].velocity = Vec2(0.0, 0.0);
      state.done[i] = 1;
    }
  }
  state.t += 1;
}

Trajectory run_episode(const WorldConfig& scenario, const Policy& policy,
                       std::uint64_t seed, const EpisodeOptions& options) {
  const int n = static_cast<int>(scenario.agents.size());
  Trajectory traj;
  traj.seed = seed;
  traj.scenario_hash = scenario_hash(scenario);

  WorldState state = initial_state(scenario);
  std::vector<CbfParams> last_params(n);

  struct Slot {
    AgentStepRecord rec;
    std::string error;
  };
  std::vector<Slot> slots(n);

  auto all_done = [&state]() {
    return std::all_of(state.done.begin(), state.done.end(),
                       [](char c) { return c != 0; });
  };

  while (state.t < scenario.max_steps && !all_done()) {
    const int t = state.t;
    parallel_for(n, options.jobs, [&](int i) {
      Slot& slot = slots[i];
      slot.error.clear();
      AgentStepRecord& rec = slot.rec;
      rec = AgentStepRecord{};
      rec.position = state.agents[i].position;
      if (state.done[i]) {
        rec.done = true;
        rec.params = last_params[i];
        return;
      }
      try {
        LocalView view = neighbors(scenario, state, i);
        rec.params = policy.act(view, t, seed);
        ControlDecision decision =
            compute_control(view, rec.params, options.controller, scenario.u_max);
        rec.control = decision.u;
        rec.feasible = decision.feasible;
        rec.reward = reward(rec.position, scenario.agents[i].goal, decision.u,
                            decision.feasible, options.reward);
      } catch (const SafetyViolationError& e) {
        slot.error = e.what();
      }
    });

    // Deterministic abort: the lowest agent index wins independent of
    // thread timing.
    for (int i = 0; i < n; ++i) {
      if (!slots[i].error.empty()) {
        traj.violation = "agent " + std::to_string(scenario.agents[i].id) +
                         " at step " + std::to_string(t) + ": " + slots[i].error;
        traj.final_positions.resize(n);
        for (int j = 0; j < n; ++j)
          traj.final_positions[j] = state.agents[j].position;
        traj.arrived.assign(state.done.begin(), state.done.end());
        return traj;
      }
    }

    StepRecord record;
    record.t = t;
    record.agents.reserve(n);
    std::vector<Vec2> controls(n);
    for (int i = 0; i < n; ++i) {
      record.agents.push_back(slots[i].rec);
      controls[i] = slots[i].rec.control;
      last_params[i] = slots[i].rec.params;
    }
    traj.steps.push_back(std::move(record));
    step(state, scenario, controls);
  }

  traj.final_positions.resize(n);
  for (int i = 0; i < n; ++i) traj.final_positions[i] = state.agents[i].position;
  traj.arrived.assign(state.done.begin(), state.done.end());
  return traj;
}

namespace {

void audit_positions(const std::vector<Vec2>& positions, int t,
                     const WorldConfig& config, double tol,
                     std::vector<SeparationViolation>& out) {
  for (std::size_t i = 0; i < config.agents.size(); ++i) {
    for (std::size_t j = i + 1; j < config.agents.size(); ++j) {
      double sep = (positions[i] - positions[j]).norm();
      double required = config.agents[i].radius + config.agents[j].radius;
      if (sep < required - tol)
        out.push_back({t, false, config.agents[i].id, config.agents[j].id, sep, required});
    }
    for (const auto& o : config.obstacles) {
      double sep = (positions[i] - o.center).norm();
      double required = config.agents[i].radius + o.radius;
      if (sep < required - tol)
        out.push_back({t, true, config.agents[i].id, o.id, sep, required});
    }
  }
}

}  // namespace

std::vector<SeparationViolation> check_safety(const Trajectory& trajectory,
                                              const WorldConfig& config,
                                              double tol) {
  std::vector<SeparationViolation> out;
  std::vector<Vec2> positions(config.agents.size());
  for (const auto& s : trajectory.steps) {
    for (std::size_t i = 0; i < s.agents.size(); ++i)
      positions[i] = s.agents[i].position;
    audit_positions(positions, s.t, config, tol, out);
  }
  if (trajectory.final_positions.size() == config.agents.size())
    audit_positions(trajectory.final_positions,
                    static_cast<int>(trajectory.steps.size()), config, tol, out);
  return out;
}

std::vector<SeparationViolation> check_safety(const Trajectory& trajectory,
                                              const WorldConfig& config) {
  return check_safety(trajectory, config, 2.0 * config.u_max * config.dt);
}

}  // namespace cbfnav
