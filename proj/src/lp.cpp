#include "flatmpc/lp.hpp"

#include <limits>
#include <vector>

namespace flatmpc {
namespace {

constexpr double kTol = 1e-9;

struct Tableau {
  Eigen::MatrixXd T;        // m x (ncols+1), last column is the RHS
  std::vector<int> basis;   // basic column per row
  int ncols = 0;

  void pivot(int row, int col) {
    T.row(row) /= T(row, col);
    for (int i = 0; i < T.rows(); ++i) {
      if (i == row) continue;
      const double f = T(i, col);
      if (f != 0.0) T.row(i) -= f * T.row(row);
    }
    basis[static_cast<size_t>(row)] = col;
  }
};

// Bland's rule simplex on a canonical tableau. `cost` has size ncols.
// Returns optimal=true, or false for unbounded. `blocked` columns never enter.
bool run_simplex(Tableau& tb, Eigen::VectorXd cost, const std::vector<bool>& blocked,
                 double& objective) {
  const int m = static_cast<int>(tb.T.rows());
  const int n = tb.ncols;

  // reduced cost row, kept canonical w.r.t. the basis
  Eigen::RowVectorXd r = cost.transpose();
  double obj = 0.0;
  for (int i = 0; i < m; ++i) {
    const double cb = cost(tb.basis[static_cast<size_t>(i)]);
    if (cb != 0.0) {
      r -= cb * tb.T.row(i).head(n);
      obj -= cb * tb.T(i, n);
    }
  }

  const long cap = 200L * (m + n) + 2000;
  for (long it = 0; it < cap; ++it) {
    int enter = -1;
    for (int j = 0; j < n; ++j) {
      if (!blocked[static_cast<size_t>(j)] && r(j) < -kTol) { enter = j; break; }
    }
    if (enter < 0) { objective = -obj; return true; }

    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double a = tb.T(i, enter);
      if (a > kTol) {
        const double ratio = tb.T(i, n) / a;
        if (ratio < best - kTol ||
            (ratio < best + kTol &&
             (leave < 0 || tb.basis[static_cast<size_t>(i)] < tb.basis[static_cast<size_t>(leave)]))) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) return false;  // unbounded

    const double re = r(enter);
    tb.pivot(leave, enter);
    r -= re * tb.T.row(leave).head(n);
    obj -= re * tb.T(leave, n);
    r(enter) = 0.0;
  }
  throw Error("lp_cycling", "simplex exceeded its iteration cap");
}

}  // namespace

LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& G,
                  const Eigen::VectorXd& w) {
  const int n = static_cast<int>(c.size());
  const int m = static_cast<int>(G.rows());

  LpResult res;
  if (m == 0) {
    // no constraints: bounded only for c = 0
    if (c.norm() <= kTol) {
      res.status = LpStatus::optimal;
      res.x = Eigen::VectorXd::Zero(n);
      res.value = 0.0;
    } else {
      res.status = LpStatus::unbounded;
    }
    return res;
  }

  // columns: x+ (n) | x- (n) | slacks (m) | artificials (for rows with w<0)
  int nart = 0;
  for (int i = 0; i < m; ++i)
    if (w(i) < 0.0) ++nart;
  const int ncols = 2 * n + m + nart;

  Tableau tb;
  tb.ncols = ncols;
  tb.T = Eigen::MatrixXd::Zero(m, ncols + 1);
  tb.basis.assign(static_cast<size_t>(m), -1);

  int art = 0;
  for (int i = 0; i < m; ++i) {
    const double sgn = (w(i) < 0.0) ? -1.0 : 1.0;
    tb.T.block(i, 0, 1, n) = sgn * G.row(i);
    tb.T.block(i, n, 1, n) = -sgn * G.row(i);
    tb.T(i, 2 * n + i) = sgn;  // slack
    tb.T(i, ncols) = sgn * w(i);
    if (sgn < 0.0) {
      tb.T(i, 2 * n + m + art) = 1.0;
      tb.basis[static_cast<size_t>(i)] = 2 * n + m + art;
      ++art;
    } else {
      tb.basis[static_cast<size_t>(i)] = 2 * n + i;
    }
  }

  std::vector<bool> blocked(static_cast<size_t>(ncols), false);

  if (nart > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(ncols);
    phase1.tail(nart).setOnes();
    double obj1 = 0.0;
    run_simplex(tb, phase1, blocked, obj1);  // phase 1 is always bounded below by 0
    if (obj1 > 1e-7) {
      res.status = LpStatus::infeasible;
      return res;
    }
    // pivot basic artificials (at zero level) out where possible, block them all
    for (int i = 0; i < m; ++i) {
      if (tb.basis[static_cast<size_t>(i)] >= 2 * n + m) {
        for (int j = 0; j < 2 * n + m; ++j) {
          if (std::abs(tb.T(i, j)) > 1e-7) { tb.pivot(i, j); break; }
        }
      }
    }
    for (int j = 2 * n + m; j < ncols; ++j) blocked[static_cast<size_t>(j)] = true;
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(ncols);
  phase2.head(n) = c;
  phase2.segment(n, n) = -c;
  double obj2 = 0.0;
  if (!run_simplex(tb, phase2, blocked, obj2)) {
    res.status = LpStatus::unbounded;
    return res;
  }

  Eigen::VectorXd xp = Eigen::VectorXd::Zero(n), xn = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    const int b = tb.basis[static_cast<size_t>(i)];
    if (b < n)
      xp(b) = tb.T(i, ncols);
    else if (b < 2 * n)
      xn(b - n) = tb.T(i, ncols);
  }
  res.status = LpStatus::optimal;
  res.x = xp - xn;
  res.value = obj2;
  return res;
}

}  // namespace flatmpc
