#include "cbfnav/sim.hpp"

#include <string>

#include "cbfnav/policy.hpp"
#include "cbfnav/scenarios.hpp"
#include "doctest.h"

using namespace cbfnav;

namespace {

WorldConfig single_agent(const Vec2& start, const Vec2& goal) {
  WorldConfig c;
  AgentSpec a;
  a.id = 0;
  a.start = start;
  a.goal = goal;
  c.agents = {a};
  return c;
}

}  // namespace

TEST_CASE("initial_state copies starts and snaps near-goal agents") {
  WorldConfig c = single_agent(Vec2(-1.0, 0.5), Vec2(1.0, 0.5));
  AgentSpec b;
  b.id = 1;
  b.start = Vec2(2.0, 2.03);
  b.goal = Vec2(2.0, 2.0);  // within the arrival radius
  c.agents.push_back(b);

  const WorldState s = initial_state(c);
  CHECK(s.t == 0);
  CHECK(s.agents[0].position == Vec2(-1.0, 0.5));
  CHECK(s.agents[0].velocity == Vec2(0.0, 0.0));
  CHECK_FALSE(s.done[0]);
  CHECK(s.agents[1].position == Vec2(2.0, 2.0));
  CHECK(bool(s.done[1]));
}

TEST_CASE("neighbors filters by sensing radius and sorts by id") {
  WorldConfig c;
  AgentSpec a0, a1, a2;
  a0.id = 5;
  a0.start = Vec2(0.0, 0.0);
  a1.id = 2;
  a1.start = Vec2(1.0, 0.0);
  a2.id = 9;
  a2.start = Vec2(3.5, 0.0);  // outside sigma = 2
  c.agents = {a0, a1, a2};
  ObstacleSpec o0, o1, o2;
  o0.id = 7;
  o0.center = Vec2(0.0, 1.0);
  o1.id = 3;
  o1.center = Vec2(0.0, -1.5);
  o2.id = 1;
  o2.center = Vec2(0.0, 4.0);  // out of range
  c.obstacles = {o0, o1, o2};

  WorldState s = initial_state(c);
  s.agents[1].velocity = Vec2(0.1, 0.2);  // broadcast p_dot

  const LocalView v = neighbors(c, s, 0);
  CHECK(v.self_id == 5);
  CHECK(v.goal == a0.goal);
  REQUIRE(v.agents.size() == 1);
  CHECK(v.agents[0].id == 2);
  CHECK(v.agents[0].state.velocity == Vec2(0.1, 0.2));
  REQUIRE(v.obstacles.size() == 2);
  CHECK(v.obstacles[0].id == 3);
  CHECK(v.obstacles[1].id == 7);
}

TEST_CASE("step applies Euler updates and caches controls") {
  WorldConfig c = single_agent(Vec2(0.0, 0.0), Vec2(5.0, 5.0));
  WorldState s = initial_state(c);
  step(s, c, {Vec2(0.5, -0.2)});
  CHECK(s.t == 1);
  CHECK(s.agents[0].position == Vec2(Vec2(0.5, -0.2) * c.dt));
  CHECK(s.agents[0].velocity == Vec2(0.5, -0.2));
}

TEST_CASE("step rejects out-of-box controls and bad shapes") {
  WorldConfig c = single_agent(Vec2(0.0, 0.0), Vec2(5.0, 5.0));
  WorldState s = initial_state(c);
  CHECK_THROWS_AS(step(s, c, {Vec2(0.6, 0.0)}), ContractViolation);
  CHECK_THROWS_AS(step(s, c, {}), ContractViolation);
}

TEST_CASE("arrival snaps to the goal and freezes the agent") {
  WorldConfig c = single_agent(Vec2(0.0, 0.0), Vec2(0.07, 0.0));
  WorldState s = initial_state(c);
  CHECK_FALSE(s.done[0]);  // 0.07 away: not yet arrived
  step(s, c, {Vec2(0.5, 0.0)});  // lands at 0.025, within the radius
  CHECK(bool(s.done[0]));
  CHECK(s.agents[0].position == Vec2(0.07, 0.0));
  CHECK(s.agents[0].velocity == Vec2(0.0, 0.0));

  step(s, c, {Vec2(0.5, 0.5)});  // ignored: the agent is done
  CHECK(s.agents[0].position == Vec2(0.07, 0.0));
}

TEST_CASE("free-space episode drives straight and arrives exactly") {
  const WorldConfig c = single_agent(Vec2(-1.0, 0.0), Vec2(1.0, 0.0));
  const FixedPolicy policy{CbfParams{}};
  const Trajectory traj = run_episode(c, policy, 0);

  REQUIRE(traj.all_arrived());
  CHECK(traj.violation.empty());
  CHECK(traj.final_positions[0] == Vec2(1.0, 0.0));
  CHECK(traj.infeasible_steps() == 0);

  // Saturated leg: far from the goal the CLF pushes into the box corner.
  CHECK(traj.steps[0].agents[0].control == Vec2(0.5, 0.0));
  CHECK(traj.steps[0].agents[0].reward == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(traj.steps[1].agents[0].position == Vec2(-0.975, 0.0));

  // 78 steps covers the distance at u_max; the slack tail adds the rest.
  CHECK(traj.steps.size() >= 78);
  CHECK(traj.steps.size() < 500);
}

TEST_CASE("a barrier breach aborts the episode deterministically") {
  const WorldConfig c = make_scenario(ScenarioKind::NarrowPassage, 1);
  CbfParams aggressive;
  aggressive.zeta_agent = 10.0;
  aggressive.eta_agent = 1.0;
  aggressive.zeta_obstacle = 10.0;
  aggressive.eta_obstacle = 1.0;
  const Trajectory traj = run_episode(c, FixedPolicy{aggressive}, 1);

  CHECK_FALSE(traj.violation.empty());
  CHECK(traj.violation.find("barrier") != std::string::npos);
  CHECK_FALSE(traj.all_arrived());
  CHECK(traj.steps.size() == 42);
  CHECK(traj.arrived.size() == 4);

  // The audit tolerance absorbs the single-step overshoot that triggered the
  // abort, so the recorded states themselves stay clean.
  CHECK(check_safety(traj, c).empty());
}

TEST_CASE("check_safety flags recorded overlaps") {
  WorldConfig c;
  AgentSpec a, b;
  a.id = 0;
  a.start = Vec2(-1.0, 0.0);
  a.goal = Vec2(1.0, 0.0);
  b.id = 1;
  b.start = Vec2(1.0, 0.0);
  b.goal = Vec2(-1.0, 0.0);
  c.agents = {a, b};
  ObstacleSpec o;
  o.id = 2;
  o.center = Vec2(0.0, 2.0);
  c.obstacles = {o};

  Trajectory traj;
  StepRecord rec;
  rec.t = 0;
  rec.agents.resize(2);
  rec.agents[0].position = Vec2(0.0, 0.0);
  rec.agents[1].position = Vec2(0.2, 0.0);  // sep 0.2 < 0.3 - tol
  traj.steps.push_back(rec);
  traj.final_positions = {Vec2(0.0, 0.0), Vec2(0.0, 1.55)};  // sep 0.45 to o

  const auto violations = check_safety(traj, c);
  REQUIRE(violations.size() == 2);
  CHECK(violations[0].t == 0);
  CHECK_FALSE(violations[0].obstacle);
  CHECK(violations[0].a == 0);
  CHECK(violations[0].b == 1);
  CHECK(violations[0].separation == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(violations[0].required == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(violations[1].t == 1);  // steps.size() marks the final positions
  CHECK(violations[1].obstacle);
  CHECK(violations[1].b == 2);

  CHECK(check_safety(traj, c, 0.26).empty());  // looser tolerance clears it
}

TEST_CASE("episodes repeat bit-for-bit") {
  const WorldConfig c = make_scenario(ScenarioKind::ProofOfConcept, 3);
  const RandomPolicy policy{ParamBounds{}, 10};
  const Trajectory x = run_episode(c, policy, 3);
  const Trajectory y = run_episode(c, policy, 3);

  REQUIRE(x.steps.size() == y.steps.size());
  for (std::size_t t = 0; t < x.steps.size(); ++t) {
    for (std::size_t i = 0; i < x.steps[t].agents.size(); ++i) {
      const auto& ax = x.steps[t].agents[i];
      const auto& ay = y.steps[t].agents[i];
      CHECK(ax.position == ay.position);
      CHECK(ax.control == ay.control);
      CHECK(ax.params.zeta_agent == ay.params.zeta_agent);
      CHECK(ax.params.eta_obstacle == ay.params.eta_obstacle);
      CHECK(ax.reward == ay.reward);
    }
  }
  for (std::size_t i = 0; i < x.final_positions.size(); ++i)
    CHECK(x.final_positions[i] == y.final_positions[i]);
}
