#pragma once

#include <Eigen/Core>
#include <limits>
#include <vector>

#include "cbfnav/types.hpp"

namespace cbfnav {

// Row provenance, kept so controller diagnostics can name the binding
// constraint. Generic rows come from tests and tooling.
enum class RowKind { Generic, Clf, CbfAgent, CbfObstacle };

struct RowTag {
  RowKind kind = RowKind::Generic;
  int id = -1;  // neighbor agent / obstacle id where applicable
};

// One linear inequality: coeffs . x >= rhs.
struct ConstraintRow {
  Eigen::VectorXd coeffs;
  double rhs = 0.0;
  RowTag tag;
};

// minimize 0.5 * sum_k quad_diag[k] * x[k]^2
// subject to rows (coeffs . x >= rhs) and box_lo <= x <= box_hi.
// quad_diag must be strictly positive (strictly convex); +-inf box entries
// mean unbounded.
struct QpProblem {
  Eigen::VectorXd quad_diag;
  std::vector<ConstraintRow> rows;
  Eigen::VectorXd box_lo;
  Eigen::VectorXd box_hi;
};

enum class QpStatus { Feasible, Infeasible };

// Constraint satisfaction tolerance and optimality certificate bound.
inline constexpr double kFeasTol = 1e-9;
inline constexpr double kKktTol = 1e-8;

// active_set uses combined row indexing: i < rows.size() is an input row;
// rows.size() + 2k is the lower bound of variable k, rows.size() + 2k + 1 the
// upper bound.
struct QpSolution {
  QpStatus status = QpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::infinity();
  std::vector<int> active_set;
  double kkt_residual = std::numeric_limits<double>::infinity();
  double max_violation = 0.0;  // emptiness certificate when Infeasible
};

struct FeasibilityResult {
  bool feasible = false;
  Eigen::VectorXd point;
  double max_violation = 0.0;  // of `point` over rows and box
};

// Fourier-Motzkin elimination; exact for the small systems used here.
// Feasible iff some point satisfies every row and the box within kFeasTol.
// With no rows and no finite bounds the returned point is the origin; finite
// box bounds alone yield the box center.
FeasibilityResult find_feasible_point(const std::vector<ConstraintRow>& rows,
                                      const Eigen::VectorXd& box_lo,
                                      const Eigen::VectorXd& box_hi);

// Primal active-set method seeded by find_feasible_point. Declares
// Infeasible exactly when find_feasible_point does. Degenerate rows
// (max |coeff| < 1e-12) are dropped when rhs <= 0 and mark the problem
// Infeasible when rhs > 0. Deterministic: ties in pivoting break toward the
// lowest row index.
QpSolution solve_qp(const QpProblem& problem);

// Max over stationarity gap, primal violation (rows and box), dual violation,
// and complementary slackness at `x`; multipliers are least-squares fitted on
// rows within 1e-7 of tightness.
double kkt_residual(const QpProblem& problem, const Eigen::VectorXd& x);

}  // namespace cbfnav
