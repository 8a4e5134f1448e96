#include <chrono>
#include <cstdio>
#include <string>

#include "cbfnav/metrics.hpp"
#include "cbfnav/parallel.hpp"
#include "cbfnav/policy.hpp"
#include "cbfnav/scenarios.hpp"
#include "cbfnav/sim.hpp"

namespace {

using cbfnav::CbfParams;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void report(const std::string& name, double serial_ms, double parallel_ms,
            bool match) {
  std::printf("%-24s serial %8.1f ms   jobs=%d %8.1f ms   speedup %.2fx   %s\n",
              name.c_str(), serial_ms, cbfnav::max_jobs(), parallel_ms,
              parallel_ms > 0.0 ? serial_ms / parallel_ms : 0.0,
              match ? "outputs match" : "OUTPUT MISMATCH");
}

}  // namespace

int main() {
  const cbfnav::ControllerConfig controller;
  const cbfnav::RewardConfig reward;
  std::printf("hardware threads available: %d\n", cbfnav::max_jobs());

  // Episode batch: the evaluation harness across seeded scenarios.
  {
    cbfnav::FixedPolicy policy(CbfParams{1.0, 1.0, 1.0, 1.0});
    auto source = cbfnav::family_source(
        cbfnav::default_spec(cbfnav::ScenarioKind::ProofOfConcept));
    auto t0 = Clock::now();
    auto serial = cbfnav::evaluate(policy, source, 16, 7, controller, reward, 1);
    const double serial_ms = ms_since(t0);
    t0 = Clock::now();
    auto parallel =
        cbfnav::evaluate(policy, source, 16, 7, controller, reward, 0);
    const double parallel_ms = ms_since(t0);
    const bool match = serial.spl.mean == parallel.spl.mean &&
                       serial.pct_speed.mean == parallel.pct_speed.mean &&
                       serial.success_rate.mean == parallel.success_rate.mean;
    report("episode batch (16)", serial_ms, parallel_ms, match);
  }

  // Grid search: one deterministic episode per parameter combination.
  {
    const cbfnav::WorldConfig scenario =
        cbfnav::make_scenario(cbfnav::ScenarioKind::ProofOfConcept, 7);
    cbfnav::GridSpec grid;
    grid.zeta_points = 5;
    grid.eta_points = 5;
    auto t0 = Clock::now();
    auto serial = cbfnav::grid_search(scenario, grid, controller, 0, 1);
    const double serial_ms = ms_since(t0);
    t0 = Clock::now();
    auto parallel = cbfnav::grid_search(scenario, grid, controller, 0, 0);
    const double parallel_ms = ms_since(t0);
    bool match = serial.size() == parallel.size();
    for (std::size_t i = 0; match && i < serial.size(); ++i)
      match = serial[i].zeta == parallel[i].zeta &&
              serial[i].eta == parallel[i].eta &&
              serial[i].spl == parallel[i].spl &&
              serial[i].pct_speed == parallel[i].pct_speed;
    report("grid search (5x5)", serial_ms, parallel_ms, match);
  }

  // Many-agent stepping: the per-agent control loop inside one episode.
  {
    cbfnav::ScenarioSpec spec;
    spec.kind = cbfnav::ScenarioKind::Cross;
    spec.agents = 12;
    const cbfnav::WorldConfig scenario = cbfnav::make_scenario(spec, 3);
    cbfnav::FixedPolicy policy(CbfParams{2.0, 1.5, 2.0, 1.5});
    cbfnav::EpisodeOptions serial_opts;
    serial_opts.controller = controller;
    serial_opts.jobs = 1;
    cbfnav::EpisodeOptions parallel_opts = serial_opts;
    parallel_opts.jobs = cbfnav::max_jobs();

    auto t0 = Clock::now();
    auto serial = cbfnav::run_episode(scenario, policy, 3, serial_opts);
    const double serial_ms = ms_since(t0);
    t0 = Clock::now();
    auto parallel = cbfnav::run_episode(scenario, policy, 3, parallel_opts);
    const double parallel_ms = ms_since(t0);
    bool match = serial.steps.size() == parallel.steps.size() &&
                 serial.final_positions.size() == parallel.final_positions.size();
    for (std::size_t i = 0; match && i < serial.final_positions.size(); ++i)
      match = serial.final_positions[i] == parallel.final_positions[i];
    report("12-agent episode", serial_ms, parallel_ms, match);
  }

  return 0;
}
