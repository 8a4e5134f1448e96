#include "cbfnav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>

#include "cbfnav/num_format.hpp"
#include "cbfnav/parallel.hpp"
#include "cbfnav/policy.hpp"
#include "cbfnav/rng.hpp"
#include "json.hpp"

namespace cbfnav {

double spl(std::span<const SplEntry> entries) {
  if (entries.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& e : entries) {
    if (!e.success) continue;
    if (e.shortest <= 0.0) {
      sum += 1.0;
      continue;
    }
    sum += e.shortest / std::max(e.actual, e.shortest);
  }
  return sum / static_cast<double>(entries.size());
}

namespace {

// Mean applied speed over the agent's moving steps; count is 0 for an agent
// that was done from the start.
std::pair<double, int> mean_moving_speed(const Trajectory& trajectory,
                                         int agent_index) {
  double sum = 0.0;
  int count = 0;
  for (const auto& s : trajectory.steps) {
    const AgentStepRecord& rec = s.agents[agent_index];
    if (rec.done) continue;
    sum += rec.control.norm();
    count += 1;
  }
  return {count > 0 ? sum / count : 0.0, count};
}

}  // namespace

double pct_speed(const Trajectory& trajectory, int agent_index, double v_ref) {
  if (!(v_ref > 0.0)) throw ContractViolation("v_ref must be positive");
  return mean_moving_speed(trajectory, agent_index).first / v_ref;
}

EpisodeMetrics episode_metrics(const Trajectory& trajectory,
                               const WorldConfig& config) {
  const int n = static_cast<int>(config.agents.size());
  if (static_cast<int>(trajectory.arrived.size()) != n ||
      static_cast<int>(trajectory.final_positions.size()) != n)
    throw ContractViolation("trajectory does not match the scenario");

  const double v_ref = reference_speed(config.u_max);
  EpisodeMetrics m;
  m.agents.resize(n);
  std::vector<SplEntry> entries(n);
  double pct_sum = 0.0;
  int arrived = 0;

  for (int i = 0; i < n; ++i) {
    AgentMetrics& a = m.agents[i];
    a.id = config.agents[i].id;
    a.success = trajectory.arrived[i] != 0;
    a.straight_line_length =
        (config.agents[i].start - config.agents[i].goal).norm();

    double path = 0.0;
    Vec2 prev = trajectory.steps.empty()
                    ? trajectory.final_positions[i]
                    : trajectory.steps.front().agents[i].position;
    for (std::size_t t = 1; t < trajectory.steps.size(); ++t) {
      const Vec2& p = trajectory.steps[t].agents[i].position;
      path += (p - prev).norm();
      prev = p;
    }
    path += (trajectory.final_positions[i] - prev).norm();
    a.path_length = path;

    a.mean_speed = mean_moving_speed(trajectory, i).first;
    pct_sum += a.mean_speed / v_ref;
    entries[i] = {a.success, a.straight_line_length, a.path_length};
    if (a.success) arrived += 1;
  }

  m.spl = spl(entries);
  m.pct_speed = n > 0 ? pct_sum / n : 0.0;
  m.success_rate = n > 0 ? static_cast<double>(arrived) / n : 0.0;
  m.episode_steps = static_cast<int>(trajectory.steps.size());
  m.infeasible_steps = trajectory.infeasible_steps();
  m.all_arrived = trajectory.all_arrived();
  return m;
}

std::vector<double> grid_axis(const Interval& interval, int points) {
  if (points < 1) throw ConfigError("grid axis needs at least one point");
  std::vector<double> axis(points);
  if (points == 1) {
    axis[0] = interval.lo;
    return axis;
  }
  const double step = (interval.hi - interval.lo) / (points - 1);
  for (int k = 0; k < points; ++k)
    axis[k] = k == points - 1 ? interval.hi : interval.lo + k * step;
  return axis;
}

std::vector<GridRow> grid_search(const WorldConfig& scenario,
                                 const GridSpec& grid,
                                 const ControllerConfig& controller,
                                 std::uint64_t seed, int jobs) {
  const std::vector<double> zetas = grid_axis(grid.zeta, grid.zeta_points);
  const std::vector<double> etas = grid_axis(grid.eta, grid.eta_points);
  const int total = static_cast<int>(zetas.size() * etas.size());

  struct Slot {
    GridRow row;
    std::exception_ptr error;
  };
  std::vector<Slot> slots(total);

  parallel_for(total, resolve_jobs(jobs), [&](int k) {
    Slot& slot = slots[k];
    try {
      const double zeta = zetas[k / etas.size()];
      const double eta = etas[k % etas.size()];
      FixedPolicy policy(CbfParams{zeta, eta, zeta, eta});
      EpisodeOptions options;
      options.controller = controller;
      options.jobs = 1;
      Trajectory traj = run_episode(scenario, policy, seed, options);
      EpisodeMetrics m = episode_metrics(traj, scenario);
      slot.row = {zeta, eta, m.spl, m.pct_speed, m.all_arrived,
                  m.infeasible_steps};
    } catch (...) {
      slot.error = std::current_exception();
    }
  });
  for (const auto& slot : slots)
    if (slot.error) std::rethrow_exception(slot.error);

  std::vector<GridRow> rows(total);
  for (int k = 0; k < total; ++k) rows[k] = slots[k].row;
  std::sort(rows.begin(), rows.end(), [](const GridRow& a, const GridRow& b) {
    if (a.spl != b.spl) return a.spl > b.spl;
    if (a.pct_speed != b.pct_speed) return a.pct_speed > b.pct_speed;
    if (a.zeta != b.zeta) return a.zeta < b.zeta;
    return a.eta < b.eta;
  });
  return rows;
}

void write_grid_csv(std::ostream& out, const std::vector<GridRow>& rows) {
  out << "zeta,eta,spl,pct_speed,success,infeasible_steps\n";
  for (const auto& r : rows) {
    out << format_double(r.zeta) << ',' << format_double(r.eta) << ','
        << format_double(r.spl) << ',' << format_double(r.pct_speed) << ','
        << (r.success ? 1 : 0) << ',' << r.infeasible_steps << '\n';
  }
}

ScenarioSource family_source(const ScenarioSpec& spec) {
  return [spec](int, std::uint64_t seed) { return make_scenario(spec, seed); };
}

ScenarioSource fixed_source(const WorldConfig& config) {
  return [config](int, std::uint64_t) { return config; };
}

namespace {

Stat stat_of(const std::vector<EvalEpisode>& records,
             double EvalEpisode::* field) {
  Stat s;
  if (records.empty()) return s;
  for (const auto& r : records) s.mean += r.*field;
  s.mean /= static_cast<double>(records.size());
  double var = 0.0;
  for (const auto& r : records) {
    const double d = r.*field - s.mean;
    var += d * d;
  }
  s.std_dev = std::sqrt(var / static_cast<double>(records.size()));
  return s;
}

}  // namespace

EvalSummary evaluate(const Policy& policy, const ScenarioSource& source,
                     int n_episodes, std::uint64_t seed,
                     const ControllerConfig& controller,
                     const RewardConfig& reward, int jobs) {
  if (n_episodes < 1) throw ConfigError("n_episodes must be at least 1");

  struct Slot {
    EvalEpisode record;
    std::exception_ptr error;
  };
  std::vector<Slot> slots(n_episodes);

  parallel_for(n_episodes, resolve_jobs(jobs), [&](int e) {
    Slot& slot = slots[e];
    try {
      const std::uint64_t scenario_seed =
          Rng::derive(seed, {0xe5ULL, static_cast<std::uint64_t>(e)});
      const std::uint64_t episode_seed =
          Rng::derive(seed, {0xe6ULL, static_cast<std::uint64_t>(e)});
      WorldConfig scenario = source(e, scenario_seed);
      EpisodeOptions options;
      options.controller = controller;
      options.reward = reward;
      options.jobs = 1;
      Trajectory traj = run_episode(scenario, policy, episode_seed, options);
      EpisodeMetrics m = episode_metrics(traj, scenario);
      slot.record = {e,      scenario_seed,      episode_seed,
                     m.spl,  m.pct_speed,        m.success_rate,
                     m.episode_steps, m.infeasible_steps, m.all_arrived};
    } catch (...) {
      slot.error = std::current_exception();
    }
  });
  for (const auto& slot : slots)
    if (slot.error) std::rethrow_exception(slot.error);

  EvalSummary summary;
  summary.episodes = n_episodes;
  summary.records.resize(n_episodes);
  for (int e = 0; e < n_episodes; ++e) summary.records[e] = slots[e].record;
  summary.spl = stat_of(summary.records, &EvalEpisode::spl);
  summary.pct_speed = stat_of(summary.records, &EvalEpisode::pct_speed);
  summary.success_rate = stat_of(summary.records, &EvalEpisode::success_rate);
  return summary;
}

std::string eval_summary_json(const EvalSummary& summary) {
  nlohmann::json j;
  j["episodes"] = summary.episodes;
  j["spl"] = {{"mean", summary.spl.mean}, {"std", summary.spl.std_dev}};
  j["pct_speed"] = {{"mean", summary.pct_speed.mean},
                    {"std", summary.pct_speed.std_dev}};
  j["success_rate"] = {{"mean", summary.success_rate.mean},
                       {"std", summary.success_rate.std_dev}};
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : summary.records) {
    records.push_back({{"episode", r.episode},
                       {"scenario_seed", r.scenario_seed},
                       {"episode_seed", r.episode_seed},
                       {"spl", r.spl},
                       {"pct_speed", r.pct_speed},
                       {"success_rate", r.success_rate},
                       {"steps", r.steps},
                       {"infeasible_steps", r.infeasible_steps},
                       {"all_arrived", r.all_arrived}});
  }
  j["records"] = std::move(records);
  return j.dump(2) + "\n";
}

}  // namespace cbfnav
