#include "cbfnav/controller.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace cbfnav {

namespace {

constexpr double kBarrierSnap = 1e-12;  // tolerated floating-point undershoot

double barrier_or_throw(double h, const std::string& what) {
  if (h >= 0.0) return h;
  if (h >= -kBarrierSnap) return 0.0;
  throw SafetyViolationError(what + " (h = " + std::to_string(h) + ")");
}

}  // namespace

double class_k(double h, double zeta, double eta) {
  if (h < 0.0) throw std::domain_error("class-K function evaluated at negative barrier");
  return zeta * std::pow(h, eta);
}

ConstraintRow clf_row(const Vec2& p, const Vec2& goal, double epsilon) {
  const Vec2 diff = p - goal;
  ConstraintRow row;
  row.coeffs = Eigen::VectorXd(3);
  row.coeffs << -2.0 * diff.x(), -2.0 * diff.y(), -1.0;
  row.rhs = epsilon * diff.squaredNorm();
  row.tag = {RowKind::Clf, -1};
  return row;
}

ConstraintRow cbf_agent_row(const Vec2& p_i, double r_i,
                            const NeighborAgent& neighbor,
                            const CbfParams& params) {
  const Vec2 diff = p_i - neighbor.state.position;
  const double rsum = r_i + neighbor.radius;
  const double h = barrier_or_throw(
      diff.squaredNorm() - rsum * rsum,
      "agent barrier negative against agent " + std::to_string(neighbor.id));
  ConstraintRow row;
  row.coeffs = Eigen::VectorXd(3);
  row.coeffs << 2.0 * diff.x(), 2.0 * diff.y(), 0.0;
  row.rhs = 2.0 * diff.dot(neighbor.state.velocity) -
            class_k(h, params.zeta_agent, params.eta_agent);
  row.tag = {RowKind::CbfAgent, neighbor.id};
  return row;
}

ConstraintRow cbf_obstacle_row(const Vec2& p_i, double r_i,
                               const NeighborObstacle& obstacle,
                               const CbfParams& params) {
  const Vec2 diff = p_i - obstacle.center;
  const double rsum = r_i + obstacle.radius;
  const double h = barrier_or_throw(
      diff.squaredNorm() - rsum * rsum,
      "obstacle barrier negative against obstacle " + std::to_string(obstacle.id));
  ConstraintRow row;
  row.coeffs = Eigen::VectorXd(3);
  row.coeffs << 2.0 * diff.x(), 2.0 * diff.y(), 0.0;
  row.rhs = -class_k(h, params.zeta_obstacle, params.eta_obstacle);
  row.tag = {RowKind::CbfObstacle, obstacle.id};
  return row;
}

ControlDecision compute_control(const LocalView& view, const CbfParams& params,
                                const ControllerConfig& config, double u_max) {
  QpProblem qp;
  qp.quad_diag = Eigen::VectorXd(3);
  qp.quad_diag << 1.0, 1.0, config.xi;
  qp.box_lo = Eigen::VectorXd(3);
  qp.box_hi = Eigen::VectorXd(3);
  const double inf = std::numeric_limits<double>::infinity();
  qp.box_lo << -u_max, -u_max, -inf;
  qp.box_hi << u_max, u_max, inf;

  qp.rows.push_back(clf_row(view.self.position, view.goal, config.epsilon));
  for (const auto& nb : view.agents)
    qp.rows.push_back(cbf_agent_row(view.self.position, view.self_radius, nb, params));
  for (const auto& ob : view.obstacles)
    qp.rows.push_back(cbf_obstacle_row(view.self.position, view.self_radius, ob, params));

  ControlDecision decision;
  decision.constraint_count =
      static_cast<int>(view.agents.size() + view.obstacles.size());

  QpSolution sol = solve_qp(qp);
  if (sol.status == QpStatus::Infeasible) return decision;  // zero fallback

  decision.u = Vec2(sol.x[0], sol.x[1]);
  decision.delta = sol.x[2];
  decision.feasible = true;
  for (int idx : sol.active_set) {
    if (idx < static_cast<int>(qp.rows.size()))
      decision.active_tags.push_back(qp.rows[idx].tag);
  }
  return decision;
}

}  // namespace cbfnav
