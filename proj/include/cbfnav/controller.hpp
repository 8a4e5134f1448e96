#pragma once

#include <vector>

#include "cbfnav/qp.hpp"
#include "cbfnav/types.hpp"

namespace cbfnav {

struct NeighborAgent {
  int id = 0;
  AgentState state;  // position and last applied control (broadcast p_dot)
  double radius = 0.15;
};

struct NeighborObstacle {
  int id = 0;
  Vec2 center{0.0, 0.0};
  double radius = 0.5;
};

// Everything agent i senses within the communication radius. Neighbor lists
// are sorted by ascending id; every neighbor center lies within sigma of
// self.position.
struct LocalView {
  int self_id = 0;
  AgentState self;
  Vec2 goal{0.0, 0.0};
  double self_radius = 0.15;
  std::vector<NeighborAgent> agents;
  std::vector<NeighborObstacle> obstacles;
};

// zeta * h^eta. Throws std::domain_error for h < 0; the caller must treat
// that as a safety violation.
double class_k(double h, double zeta, double eta);

// CLF row in solver convention (coeffs . x >= rhs, x = (u1, u2, delta)):
// the descent condition 2(p-d).u + eps*V + delta <= 0 with V = ||p-d||^2.
ConstraintRow clf_row(const Vec2& p, const Vec2& goal, double epsilon);

// Inter-agent CBF row for h = ||p_i-p_j||^2 - (R_i+R_j)^2, compensating the
// neighbor's broadcast velocity. Throws SafetyViolationError when h < 0
// beyond floating-point noise.
ConstraintRow cbf_agent_row(const Vec2& p_i, double r_i,
                            const NeighborAgent& neighbor,
                            const CbfParams& params);

// Static-obstacle CBF row for h = ||p_i-c||^2 - (R_i+R_l)^2.
ConstraintRow cbf_obstacle_row(const Vec2& p_i, double r_i,
                               const NeighborObstacle& obstacle,
                               const CbfParams& params);

struct ControlDecision {
  Vec2 u{0.0, 0.0};
  double delta = 0.0;
  bool feasible = false;
  std::vector<RowTag> active_tags;  // rows tight at the optimum
  int constraint_count = 0;         // CBF rows assembled (C_i)
};

// Assembles one CLF row plus one CBF row per neighbor and solves the safety
// filter QP (quad_diag (1, 1, xi), |u|_inf <= u_max, delta free). Infeasible
// programs return the zero control with feasible = false; they are a normal
// outcome, not an error. Uses only the local view: decentralized by
// construction.
ControlDecision compute_control(const LocalView& view, const CbfParams& params,
                                const ControllerConfig& config, double u_max);

}  // namespace cbfnav
