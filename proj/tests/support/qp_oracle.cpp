#include "support/qp_oracle.hpp"

#include <Eigen/Dense>
#include <array>
#include <cassert>
#include <cmath>
#include <limits>
#include <vector>

namespace cbfnav::testing {

namespace {

constexpr double kAcceptTol = 1e-9;

// Candidate for the equality subset idx[0..k): the minimizer of the
// objective restricted to those constraints being tight. Returns false when
// the subset is (numerically) dependent; some independent subset then covers
// the same face.
bool restricted_minimizer(const std::vector<Eigen::Vector3d>& normals,
                          const std::vector<double>& offsets,
                          const Eigen::Vector3d& qinv,
                          const std::array<int, 3>& idx, int k,
                          Eigen::Vector3d& x) {
  Eigen::Matrix3d M = Eigen::Matrix3d::Identity();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (int r = 0; r < k; ++r) {
    b[r] = offsets[static_cast<std::size_t>(idx[r])];
    for (int c = 0; c < k; ++c)
      M(r, c) = normals[static_cast<std::size_t>(idx[r])].dot(
          qinv.cwiseProduct(normals[static_cast<std::size_t>(idx[c])]));
  }
  Eigen::FullPivLU<Eigen::Matrix3d> lu(M);
  if (!lu.isInvertible()) return false;
  const Eigen::Vector3d lambda = lu.solve(b);
  Eigen::Vector3d span = Eigen::Vector3d::Zero();
  for (int r = 0; r < k; ++r)
    span += lambda[r] * normals[static_cast<std::size_t>(idx[r])];
  x = qinv.cwiseProduct(span);
  for (int r = 0; r < k; ++r) {
    const double off = offsets[static_cast<std::size_t>(idx[r])];
    const double res = normals[static_cast<std::size_t>(idx[r])].dot(x) - off;
    if (std::abs(res) > 1e-7 * std::max(1.0, std::abs(off))) return false;
  }
  return true;
}

}  // namespace

OracleResult oracle_solve(const QpProblem& problem) {
  const int n = static_cast<int>(problem.quad_diag.size());
  assert(n >= 1 && n <= 3);

  // Pad to three dimensions: unit curvature and no constraints on unused
  // axes, so every candidate is zero there and the objective is unchanged.
  Eigen::Vector3d quad = Eigen::Vector3d::Ones();
  for (int k = 0; k < n; ++k) quad[k] = problem.quad_diag[k];
  const Eigen::Vector3d qinv = quad.cwiseInverse();

  std::vector<Eigen::Vector3d> normals;
  std::vector<double> offsets;
  for (const auto& row : problem.rows) {
    if (row.coeffs.cwiseAbs().maxCoeff() < 1e-12) {
      if (row.rhs > 0.0) return {false, Eigen::VectorXd(), 0.0};
      continue;  // vacuous
    }
    Eigen::Vector3d a = Eigen::Vector3d::Zero();
    for (int k = 0; k < n; ++k) a[k] = row.coeffs[k];
    normals.push_back(a);
    offsets.push_back(row.rhs);
  }
  const std::size_t real_rows = normals.size();
  for (int k = 0; k < n; ++k) {
    if (std::isfinite(problem.box_lo[k])) {
      normals.push_back(Eigen::Vector3d::Unit(k));
      offsets.push_back(problem.box_lo[k]);
    }
    if (std::isfinite(problem.box_hi[k])) {
      normals.push_back(-Eigen::Vector3d::Unit(k));
      offsets.push_back(-problem.box_hi[k]);
    }
  }
  const int total = static_cast<int>(normals.size());

  bool found = false;
  double best_obj = std::numeric_limits<double>::infinity();
  Eigen::Vector3d best_x = Eigen::Vector3d::Zero();
  const auto consider = [&](const Eigen::Vector3d& x) {
    for (std::size_t i = 0; i < real_rows; ++i)
      if (normals[i].dot(x) < offsets[i] - kAcceptTol) return;
    for (int k = 0; k < n; ++k) {
      if (x[k] < problem.box_lo[k] - kAcceptTol) return;
      if (x[k] > problem.box_hi[k] + kAcceptTol) return;
    }
    const double obj = 0.5 * quad.dot(x.cwiseProduct(x));
    if (!found || obj < best_obj) {
      found = true;
      best_obj = obj;
      best_x = x;
    }
  };

  consider(Eigen::Vector3d::Zero());
  Eigen::Vector3d x;
  for (int i = 0; i < total; ++i) {
    if (restricted_minimizer(normals, offsets, qinv, {i, 0, 0}, 1, x))
      consider(x);
    for (int j = i + 1; j < total; ++j) {
      if (restricted_minimizer(normals, offsets, qinv, {i, j, 0}, 2, x))
        consider(x);
      for (int l = j + 1; l < total; ++l)
        if (restricted_minimizer(normals, offsets, qinv, {i, j, l}, 3, x))
          consider(x);
    }
  }

  if (!found) return {false, Eigen::VectorXd(), 0.0};
  OracleResult out;
  out.feasible = true;
  out.x = best_x.head(n);
  out.objective = best_obj;
  return out;
}

GeneratedQp make_random_qp(Rng& rng) {
  GeneratedQp out;
  const int n = 3;
  QpProblem& p = out.problem;
  p.quad_diag.resize(n);
  p.box_lo.resize(n);
  p.box_hi.resize(n);
  for (int k = 0; k < n; ++k) p.quad_diag[k] = rng.uniform(0.3, 3.0);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    if (rng.uniform01() < 0.5) {
      p.box_lo[k] = -rng.uniform(0.5, 1.5);
      p.box_hi[k] = rng.uniform(0.5, 1.5);
    } else {
      p.box_lo[k] = -kInf;
      p.box_hi[k] = kInf;
    }
  }

  // Interior witness the feasible rows are built around.
  Eigen::VectorXd x0(n);
  for (int k = 0; k < n; ++k) {
    const double lo = std::max(p.box_lo[k], -2.0) + 0.01;
    const double hi = std::min(p.box_hi[k], 2.0) - 0.01;
    x0[k] = rng.uniform(lo, hi);
  }

  const int m = rng.uniform_int(0, 12);
  for (int i = 0; i < m; ++i) {
    ConstraintRow row;
    row.coeffs.resize(n);
    do {
      for (int k = 0; k < n; ++k) row.coeffs[k] = rng.uniform(-5.0, 5.0);
    } while (row.coeffs.cwiseAbs().maxCoeff() < 0.1);
    row.rhs = row.coeffs.dot(x0) - rng.uniform(1e-3, 1.0);
    p.rows.push_back(row);
  }

  const double cls = rng.uniform01();
  out.feasible = true;
  if (cls < 0.25 && m > 0) {
    // a.x >= c together with -a.x >= gap - c has no solution for gap > 0.
    const auto& a = p.rows[static_cast<std::size_t>(rng.uniform_int(0, m - 1))];
    ConstraintRow contra;
    contra.coeffs = -a.coeffs;
    contra.rhs = rng.uniform(0.5, 2.0) - a.rhs;
    p.rows.push_back(contra);
    out.feasible = false;
  } else if (cls < 0.33) {
    ConstraintRow degenerate;
    degenerate.coeffs = Eigen::VectorXd::Zero(n);
    if (cls < 0.31) {
      degenerate.rhs = -rng.uniform(0.0, 1.0);  // vacuous, must be dropped
    } else {
      degenerate.rhs = rng.uniform(0.1, 1.0);  // zero row, positive rhs
      out.feasible = false;
    }
    p.rows.push_back(degenerate);
  }
  return out;
}

}  // namespace cbfnav::testing
