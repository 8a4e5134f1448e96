#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbfnav {

using Vec2 = Eigen::Vector2d;

// Malformed scenario / config / file input.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A barrier went negative or a separation constraint was breached at runtime.
struct SafetyViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A caller broke an API precondition (shape mismatch, out-of-box control, ...).
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

struct AgentSpec {
  int id = 0;
  Vec2 start{0.0, 0.0};
  Vec2 goal{0.0, 0.0};
  double radius = 0.15;
};

struct ObstacleSpec {
  int id = 0;
  Vec2 center{0.0, 0.0};
  double radius = 0.5;
};

// Dynamic per-agent state. velocity caches the control applied on the
// previous step (zero at t = 0); it is what neighbors see as p_dot.
struct AgentState {
  Vec2 position{0.0, 0.0};
  Vec2 velocity{0.0, 0.0};
};

struct Workspace {
  Vec2 min{-5.0, -5.0};
  Vec2 max{5.0, 5.0};
};

// Full static description of one navigation problem.
struct WorldConfig {
  std::vector<AgentSpec> agents;
  std::vector<ObstacleSpec> obstacles;
  double sensing_radius = 2.0;  // sigma, closed-ball neighborhoods
  double dt = 0.05;
  int max_steps = 500;
  double u_max = 0.5;  // per-axis control bound
  Workspace workspace;
};

// CBF class-K parameters (zeta, eta) for the agent and obstacle constraints.
struct CbfParams {
  double zeta_agent = 1.0;
  double eta_agent = 1.0;
  double zeta_obstacle = 1.0;
  double eta_obstacle = 1.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct ParamBounds {
  Interval zeta{0.1, 10.0};
  Interval eta{1.0, 2.0};
};

struct ControllerConfig {
  double epsilon = 1.0;  // CLF convergence rate
  double xi = 10.0;      // slack penalty weight
  ParamBounds bounds;
};

// Center distance minus the sum of radii; negative means overlap.
double pairwise_clearance(const Vec2& p, double r_p, const Vec2& q, double r_q);

// Returns one human-readable message per violated invariant; empty means valid.
// Checks radii, workspace containment of starts and goals, start clearances
// (agent-agent and agent-obstacle), duplicate ids, and positivity of
// sensing_radius / dt / max_steps / u_max / workspace extent.
std::vector<std::string> validate_config(const WorldConfig& config);

}  // namespace cbfnav
