#include "flatmpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flatmpc {
namespace {

constexpr double kFeasTol = 1e-10;
constexpr double kDualTol = 1e-12;

void erase_index(std::vector<int>& v, int j) { v.erase(v.begin() + j); }

void erase_column(Eigen::MatrixXd& M, int j) {
  const int cols = static_cast<int>(M.cols());
  if (j < cols - 1)
    M.block(0, j, M.rows(), cols - 1 - j) = M.block(0, j + 1, M.rows(), cols - 1 - j);
  M.conservativeResize(Eigen::NoChange, cols - 1);
}

void erase_row(Eigen::MatrixXd& M, int j) {
  const int rows = static_cast<int>(M.rows());
  if (j < rows - 1)
    M.block(j, 0, rows - 1 - j, M.cols()) = M.block(j + 1, 0, rows - 1 - j, M.cols());
  M.conservativeResize(rows - 1, Eigen::NoChange);
}

void erase_entry(Eigen::VectorXd& v, int j) {
  const int n = static_cast<int>(v.size());
  if (j < n - 1) v.segment(j, n - 1 - j) = v.segment(j + 1, n - 1 - j);
  v.conservativeResize(n - 1);
}

}  // namespace

QPSolution solve_qp(const Eigen::LLT<Eigen::MatrixXd>& Hllt, const Eigen::VectorXd& f,
                    const Eigen::MatrixXd& G, const Eigen::VectorXd& w) {
  const int n = static_cast<int>(f.size());
  const int m = static_cast<int>(G.rows());

  QPSolution sol;
  Eigen::VectorXd z = Hllt.solve(-f);

  std::vector<int> act;
  Eigen::MatrixXd Gact(0, n);   // active rows
  Eigen::MatrixXd HiNt(n, 0);   // H^{-1} g_a per active row
  Eigen::MatrixXd Sact(0, 0);   // Gact H^{-1} Gact'
  Eigen::LDLT<Eigen::MatrixXd> Sldlt;
  Eigen::VectorXd nu(0);

  auto drop = [&](int j) {
    erase_index(act, j);
    erase_row(Gact, j);
    erase_column(HiNt, j);
    erase_row(Sact, j);
    erase_column(Sact, j);
    erase_entry(nu, j);
    if (Sact.rows() > 0) Sldlt.compute(Sact);
  };

  const long cap = 50L * (m + n) + 1000;
  long iters = 0;

  while (true) {
    // most violated constraint; ties resolve to the lowest row index
    int p = -1;
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
      const double v = G.row(i).dot(z) - w(i);
      const double tol = kFeasTol * (1.0 + std::abs(w(i)));
      if (v > tol && v > worst) { worst = v; p = i; }
    }
    if (p < 0) break;

    const Eigen::VectorXd gp = G.row(p).transpose();
    const Eigen::VectorXd u = Hllt.solve(gp);
    const double gpu = gp.dot(u);
    double lam_p = 0.0;

    while (true) {
      if (++iters > cap) throw Error("qp_cycling", "dual active-set exceeded iteration cap");

      const int q = static_cast<int>(act.size());
      Eigen::VectorXd r(q), d;
      if (q > 0) {
        r = Sldlt.solve(Gact * u);
        d = u - HiNt * r;
      } else {
        d = u;
      }
      const double dHd = gp.dot(d);
      const double sp = gp.dot(z) - w(p);

      // dual blocking step over active rows
      double t1 = std::numeric_limits<double>::infinity();
      int j1 = -1;
      for (int j = 0; j < q; ++j) {
        if (r(j) > kDualTol) {
          const double ratio = nu(j) / r(j);
          if (ratio < t1 - 1e-15 || (ratio < t1 + 1e-15 && (j1 < 0 || act[j] < act[j1]))) {
            t1 = ratio;
            j1 = j;
          }
        }
      }

      if (dHd > 1e-10 * std::max(1.0, gpu)) {
        const double t2 = sp / dHd;
        const double t = std::min(t1, t2);
        z -= t * d;
        if (q > 0) nu -= t * r;
        lam_p += t;
        if (t2 <= t1) {
          // p becomes active
          Eigen::VectorXd scol(q + 1);
          if (q > 0) scol.head(q) = Gact * u;
          scol(q) = gpu;
          Sact.conservativeResize(q + 1, q + 1);
          Sact.block(0, q, q, 1) = scol.head(q);
          Sact.block(q, 0, 1, q) = scol.head(q).transpose();
          Sact(q, q) = scol(q);
          Gact.conservativeResize(q + 1, Eigen::NoChange);
          Gact.row(q) = gp.transpose();
          HiNt.conservativeResize(Eigen::NoChange, q + 1);
          HiNt.col(q) = u;
          act.push_back(p);
          nu.conservativeResize(q + 1);
          nu(q) = lam_p;
          Sldlt.compute(Sact);
          break;
        }
        drop(j1);
      } else {
        // g_p lies in the span of the active normals
        if (j1 < 0) {
          sol.status = QpStatus::infeasible;
          sol.z = z;
          sol.lambda = Eigen::VectorXd::Zero(m);
          sol.iterations = static_cast<int>(iters);
          return sol;
        }
        nu -= t1 * r;
        lam_p += t1;
        drop(j1);
      }
    }
  }

  // polish: exact KKT solve on the final active set
  if (!act.empty()) {
    const Eigen::VectorXd rhs = Gact * Hllt.solve(f) + [&] {
      Eigen::VectorXd wa(act.size());
      for (size_t j = 0; j < act.size(); ++j) wa(static_cast<int>(j)) = w(act[j]);
      return wa;
    }();
    const Eigen::VectorXd nu_pol = -Sldlt.solve(rhs);
    const Eigen::VectorXd z_pol = -Hllt.solve(f + Gact.transpose() * nu_pol);
    bool ok = (nu_pol.size() == 0) || nu_pol.minCoeff() > -1e-9;
    if (ok && m > 0) {
      for (int i = 0; i < m && ok; ++i)
        ok = G.row(i).dot(z_pol) - w(i) <= 1e-8 * (1.0 + std::abs(w(i)));
    }
    if (ok) {
      z = z_pol;
      nu = nu_pol;
    }
  }

  sol.status = QpStatus::optimal;
  sol.z = z;
  sol.lambda = Eigen::VectorXd::Zero(m);
  for (size_t j = 0; j < act.size(); ++j) {
    sol.lambda(act[j]) = std::max(0.0, nu(static_cast<int>(j)));
    if (nu(static_cast<int>(j)) <= 1e-9) sol.status = QpStatus::degenerate;
  }
  sol.active_set = act;
  std::sort(sol.active_set.begin(), sol.active_set.end());
  sol.iterations = static_cast<int>(iters);
  return sol;
}

QPSolution solve_qp(const QPProblem& p) {
  const Eigen::MatrixXd Hs = 0.5 * (p.H + p.H.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hs, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 1e-9)
    throw Error("qp_not_convex", "Hessian is not positive definite");
  Eigen::LLT<Eigen::MatrixXd> llt(Hs);
  return solve_qp(llt, p.f, p.G, p.w);
}

}  // namespace flatmpc
