#include "cbfnav/qp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace cbfnav {

namespace {

constexpr double kZeroCoeff = 1e-12;  // coefficient magnitude treated as absent

struct DenseRow {
  Eigen::VectorXd a;
  double b = 0.0;
};

double max_abs(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Input rows followed by finite box rows; `index` holds the combined index of
// each row (i < m input row, m + 2k lower bound k, m + 2k + 1 upper bound k).
struct CombinedSystem {
  int n = 0;
  std::vector<DenseRow> rows;
  std::vector<int> index;
};

CombinedSystem combine(const std::vector<ConstraintRow>& rows,
                       const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                       int skip_input_rows_below_scale) {
  CombinedSystem sys;
  sys.n = static_cast<int>(lo.size());
  if (hi.size() != lo.size()) throw ContractViolation("box bound sizes differ");
  for (int k = 0; k < sys.n; ++k) {
    if (lo[k] > hi[k]) throw ConfigError("box lower bound exceeds upper bound");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].coeffs.size() != sys.n)
      throw ContractViolation("constraint row dimension mismatch");
    if (skip_input_rows_below_scale && max_abs(rows[i].coeffs) < kZeroCoeff)
      continue;  // caller already decided these rows are vacuous
    sys.rows.push_back({rows[i].coeffs, rows[i].rhs});
    sys.index.push_back(static_cast<int>(i));
  }
  const int m = static_cast<int>(rows.size());
  for (int k = 0; k < sys.n; ++k) {
    if (std::isfinite(lo[k])) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(sys.n);
      e[k] = 1.0;
      sys.rows.push_back({e, lo[k]});
      sys.index.push_back(m + 2 * k);
    }
    if (std::isfinite(hi[k])) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(sys.n);
      e[k] = -1.0;
      sys.rows.push_back({e, -hi[k]});
      sys.index.push_back(m + 2 * k + 1);
    }
  }
  return sys;
}

double violation_at(const CombinedSystem& sys, const Eigen::VectorXd& x) {
  double v = 0.0;
  for (const auto& r : sys.rows) v = std::max(v, r.b - r.a.dot(x));
  return v;
}

}  // namespace

FeasibilityResult find_feasible_point(const std::vector<ConstraintRow>& rows,
                                      const Eigen::VectorXd& box_lo,
                                      const Eigen::VectorXd& box_hi) {
  CombinedSystem sys = combine(rows, box_lo, box_hi, /*skip*/ 0);
  const int n = sys.n;
  FeasibilityResult res;
  res.point = Eigen::VectorXd::Zero(n);
  bool contradiction = false;

  // levels[k] constrains variables 0..k; eliminate downward from n-1.
  std::vector<std::vector<DenseRow>> levels(std::max(n, 1));
  {
    std::vector<DenseRow> cur = sys.rows;
    for (int k = n - 1; k >= 0; --k) {
      // Vacuous rows at this level: all coefficients absent.
      std::vector<DenseRow> kept;
      for (auto& r : cur) {
        double scale = max_abs(r.a);
        if (scale < kZeroCoeff) {
          if (r.b > kFeasTol) contradiction = true;
          continue;
        }
        kept.push_back(std::move(r));
      }
      levels[k] = kept;
      if (k == 0) break;
      std::vector<DenseRow> next;
      std::vector<const DenseRow*> pos, neg;
      for (const auto& r : kept) {
        double tol = kZeroCoeff * std::max(1.0, max_abs(r.a));
        if (r.a[k] > tol) {
          pos.push_back(&r);
        } else if (r.a[k] < -tol) {
          neg.push_back(&r);
        } else {
          next.push_back(r);
        }
      }
      for (const DenseRow* p : pos) {
        for (const DenseRow* q : neg) {
          DenseRow combined;
          combined.a = p->a[k] * q->a - q->a[k] * p->a;
          combined.a[k] = 0.0;
          combined.b = p->a[k] * q->b - q->a[k] * p->b;
          next.push_back(std::move(combined));
        }
      }
      cur = std::move(next);
    }
  }

  // Back-substitute, picking interval midpoints (robust interior choices).
  for (int k = 0; k < n; ++k) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (const auto& r : levels[k]) {
      double tol = kZeroCoeff * std::max(1.0, max_abs(r.a));
      double resid = r.b;
      for (int j = 0; j < k; ++j) resid -= r.a[j] * res.point[j];
      if (r.a[k] > tol) {
        lo = std::max(lo, resid / r.a[k]);
      } else if (r.a[k] < -tol) {
        hi = std::min(hi, resid / r.a[k]);
      } else if (resid > kFeasTol * std::max(1.0, std::abs(r.b))) {
        contradiction = true;
      }
    }
    if (lo > hi + kFeasTol) contradiction = true;
    double x;
    if (std::isfinite(lo) && std::isfinite(hi)) {
      x = 0.5 * (lo + hi);
    } else if (std::isfinite(lo)) {
      x = lo + 1.0;
    } else if (std::isfinite(hi)) {
      x = hi - 1.0;
    } else {
      x = 0.0;
    }
    res.point[k] = x;
  }

  res.max_violation = violation_at(sys, res.point);
  res.feasible = !contradiction && res.max_violation <= kFeasTol;
  return res;
}

QpSolution solve_qp(const QpProblem& problem) {
  const int n = static_cast<int>(problem.quad_diag.size());
  if (n == 0) throw ContractViolation("empty problem");
  if (problem.box_lo.size() != n || problem.box_hi.size() != n)
    throw ContractViolation("box bound sizes differ from dimension");
  for (int k = 0; k < n; ++k) {
    if (!(problem.quad_diag[k] > 0.0))
      throw ConfigError("quad_diag must be strictly positive");
  }

  QpSolution sol;
  sol.x = Eigen::VectorXd::Zero(n);

  // Degenerate rows: vacuous when rhs <= 0, contradictory otherwise.
  std::vector<ConstraintRow> clean;
  clean.reserve(problem.rows.size());
  for (const auto& r : problem.rows) {
    if (r.coeffs.size() != n)
      throw ContractViolation("constraint row dimension mismatch");
    if (max_abs(r.coeffs) < kZeroCoeff) {
      if (r.rhs > 0.0) {
        sol.status = QpStatus::Infeasible;
        sol.max_violation = r.rhs;
        return sol;
      }
      continue;
    }
    clean.push_back(r);
  }

  FeasibilityResult phase1 =
      find_feasible_point(clean, problem.box_lo, problem.box_hi);
  if (!phase1.feasible) {
    sol.status = QpStatus::Infeasible;
    sol.x = phase1.point;
    sol.max_violation = phase1.max_violation;
    return sol;
  }

  CombinedSystem sys = combine(clean, problem.box_lo, problem.box_hi, /*skip*/ 1);
  const int total = static_cast<int>(sys.rows.size());
  const Eigen::VectorXd inv_q = problem.quad_diag.cwiseInverse();

  Eigen::VectorXd x = phase1.point;
  std::vector<int> work;  // positions into sys.rows, ascending
  std::vector<char> in_work(total, 0);

  const int max_iter = 100 + 20 * total;
  int iter = 0;
  for (;; ++iter) {
    if (iter > max_iter) {
      std::ostringstream os;
      os.precision(17);
      os << "active-set iteration limit; n=" << n << " quad=[";
      for (int kk = 0; kk < n; ++kk) os << problem.quad_diag[kk] << ' ';
      os << "] lo=[";
      for (int kk = 0; kk < n; ++kk) os << problem.box_lo[kk] << ' ';
      os << "] hi=[";
      for (int kk = 0; kk < n; ++kk) os << problem.box_hi[kk] << ' ';
      os << "] rows:";
      for (const auto& r : clean) {
        os << " {";
        for (int kk = 0; kk < n; ++kk) os << r.coeffs[kk] << ' ';
        os << "| " << r.rhs << '}';
      }
      throw ContractViolation(os.str());
    }

    // Equality-constrained subproblem on the working set via the Schur
    // complement of the diagonal Hessian.
    const int k = static_cast<int>(work.size());
    Eigen::VectorXd y, nu;
    if (k == 0) {
      y = Eigen::VectorXd::Zero(n);
    } else {
      Eigen::MatrixXd A(k, n);
      Eigen::VectorXd b(k);
      for (int i = 0; i < k; ++i) {
        A.row(i) = sys.rows[work[i]].a;
        b[i] = sys.rows[work[i]].b;
      }
      // Min-norm multipliers: the working set can go linearly dependent at
      // degenerate vertices, where an LDLT of the singular Schur complement
      // returns noise.
      Eigen::MatrixXd M = A * inv_q.asDiagonal() * A.transpose();
      nu = M.completeOrthogonalDecomposition().solve(b);
      y = inv_q.asDiagonal() * (A.transpose() * nu);
    }
    Eigen::VectorXd p = y - x;

    // Past this point plain most-negative / nearest-blocker selection has
    // been observed to cycle on degenerate vertices; lowest-index rules
    // (Bland) are slower but terminate.
    const bool bland = iter > total + 30;

    if (max_abs(p) <= 1e-11 * std::max(1.0, max_abs(x))) {
      // Stationary on the working set; check multiplier signs.
      int drop = -1;
      double most_negative = -1e-11;
      for (int i = 0; i < k; ++i) {
        if (nu[i] < most_negative) {
          most_negative = nu[i];
          drop = i;
          if (bland) break;
        }
      }
      if (drop < 0) break;
      in_work[work[drop]] = 0;
      work.erase(work.begin() + drop);
      continue;
    }

    // Step to the nearest blocking constraint. Rows that would end up
    // violated by no more than the feasibility tolerance do not block; this
    // keeps sub-tolerance degeneracies from stalling progress.
    double alpha = 1.0;
    int blocker = -1;
    for (int i = 0; i < total; ++i) {
      if (in_work[i]) continue;
      double d = sys.rows[i].a.dot(p);
      if (d >= -1e-13) continue;
      double r = sys.rows[i].a.dot(x) - sys.rows[i].b;
      if (r + d >= -kFeasTol) continue;
      if (r < 0.0) r = 0.0;
      double ai = r / (-d);
      if (ai < alpha) {
        alpha = ai;
        blocker = i;
      }
    }
    x += alpha * p;
    if (blocker >= 0) {
      auto pos = std::lower_bound(work.begin(), work.end(), blocker);
      work.insert(pos, blocker);
      in_work[blocker] = 1;
    }
  }

  // Snap exactly into the box; the correction is at floating-point scale.
  for (int kk = 0; kk < n; ++kk) {
    if (std::isfinite(problem.box_lo[kk]) && x[kk] < problem.box_lo[kk])
      x[kk] = problem.box_lo[kk];
    if (std::isfinite(problem.box_hi[kk]) && x[kk] > problem.box_hi[kk])
      x[kk] = problem.box_hi[kk];
  }

  sol.status = QpStatus::Feasible;
  sol.x = x;
  sol.objective = 0.5 * problem.quad_diag.dot(x.cwiseProduct(x));
  sol.active_set.clear();
  for (int w : work) sol.active_set.push_back(sys.index[w]);
  std::sort(sol.active_set.begin(), sol.active_set.end());
  sol.max_violation = violation_at(sys, x);
  sol.kkt_residual = kkt_residual(problem, x);
  return sol;
}

double kkt_residual(const QpProblem& problem, const Eigen::VectorXd& x) {
  const int n = static_cast<int>(problem.quad_diag.size());
  if (x.size() != n) throw ContractViolation("candidate dimension mismatch");
  CombinedSystem sys = combine(problem.rows, problem.box_lo, problem.box_hi, 1);

  double primal = 0.0;
  std::vector<int> active;
  for (std::size_t i = 0; i < sys.rows.size(); ++i) {
    double slack = sys.rows[i].a.dot(x) - sys.rows[i].b;
    primal = std::max(primal, -slack);
    if (std::abs(slack) <= 1e-7 * std::max(1.0, std::abs(sys.rows[i].b)))
      active.push_back(static_cast<int>(i));
  }

  Eigen::VectorXd g = problem.quad_diag.cwiseProduct(x);
  double stationarity, dual = 0.0, comp = 0.0;
  if (active.empty()) {
    stationarity = max_abs(g);
  } else {
    const int k = static_cast<int>(active.size());
    Eigen::MatrixXd At(n, k);
    for (int i = 0; i < k; ++i) At.col(i) = sys.rows[active[i]].a;
    Eigen::VectorXd lambda = At.colPivHouseholderQr().solve(g);
    stationarity = max_abs(g - At * lambda);
    for (int i = 0; i < k; ++i) {
      dual = std::max(dual, -lambda[i]);
      double slack = sys.rows[active[i]].a.dot(x) - sys.rows[active[i]].b;
      comp = std::max(comp, std::abs(lambda[i] * slack));
    }
  }
  return std::max(std::max(primal, stationarity), std::max(dual, comp));
}

}  // namespace cbfnav
