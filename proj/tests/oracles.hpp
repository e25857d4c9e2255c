#pragma once

// Independent reference computations the test suites check the library
// against. Everything here is written from the underlying definitions, not
// by calling back into the code under test.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "flatmpc/flat_model.hpp"
#include "flatmpc/polytope.hpp"

namespace oracles {

// Fixed-point Riccati recursion from P0 = Q.
inline Eigen::MatrixXd dare_value_iteration(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                            const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  Eigen::MatrixXd P = Q;
  for (long k = 0; k < 2000000; ++k) {
    const Eigen::MatrixXd BtPB = R + B.transpose() * P * B;
    const Eigen::MatrixXd next =
        Q + A.transpose() * P * A -
        A.transpose() * P * B * BtPB.inverse() * B.transpose() * P * A;
    if ((next - P).cwiseAbs().maxCoeff() <= 1e-13) return next;
    P = next;
  }
  return P;
}

// Backward finite-horizon LQR recursion; returns the step-0 gain for
// u = -K x with terminal weight P.
inline Eigen::MatrixXd finite_horizon_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                                           const Eigen::MatrixXd& P, int N) {
  Eigen::MatrixXd Pk = P;
  Eigen::MatrixXd K;
  for (int k = N - 1; k >= 0; --k) {
    K = (R + B.transpose() * Pk * B).inverse() * (B.transpose() * Pk * A);
    const Eigen::MatrixXd Acl = A - B * K;
    Pk = Q + K.transpose() * R * K + Acl.transpose() * Pk * Acl;
  }
  return K;
}

// Accelerated projected gradient on the dual of
//   min 1/2 z'Hz + f'z  s.t.  Gz <= w,
// where the projection is onto the nonnegative orthant. Returns the primal
// point once the KKT residuals drop below tol, or nullopt on stall.
inline std::optional<Eigen::VectorXd> dual_pg_qp(const Eigen::MatrixXd& H,
                                                 const Eigen::VectorXd& f,
                                                 const Eigen::MatrixXd& G,
                                                 const Eigen::VectorXd& w, double tol = 1e-10) {
  const Eigen::LLT<Eigen::MatrixXd> llt(H);
  const Eigen::MatrixXd S = G * llt.solve(G.transpose());
  const double L = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly)
                       .eigenvalues()
                       .maxCoeff();
  const double step = 1.0 / std::max(L, 1e-12);

  Eigen::VectorXd lam = Eigen::VectorXd::Zero(G.rows()), y = lam, lam_prev = lam;
  double t = 1.0;
  for (long k = 0; k < 2000000; ++k) {
    const Eigen::VectorXd z = llt.solve(-(f + G.transpose() * y));
    const Eigen::VectorXd grad = G * z - w;
    lam_prev = lam;
    lam = (y + step * grad).cwiseMax(0.0);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = lam + ((t - 1.0) / t_next) * (lam - lam_prev);
    t = t_next;
    if (k % 50 == 0) {
      const Eigen::VectorXd zp = llt.solve(-(f + G.transpose() * lam));
      const Eigen::VectorXd s = G * zp - w;
      const double viol = s.size() ? s.maxCoeff() : 0.0;
      const double comp = s.size() ? lam.cwiseProduct(s).cwiseAbs().maxCoeff() : 0.0;
      if (viol <= tol && comp <= tol) return zp;
    }
  }
  return std::nullopt;
}

// Exact LP by enumeration of basic points: every d-subset of rows solved as
// an equality system, feasibility-checked, best objective kept. Only for
// bounded problems with a vertex optimum.
inline std::optional<double> basis_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& G,
                                      const Eigen::VectorXd& w) {
  const int m = static_cast<int>(G.rows());
  const int d = static_cast<int>(G.cols());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> idx(static_cast<size_t>(d));
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == d) {
      Eigen::MatrixXd Gb(d, d);
      Eigen::VectorXd wb(d);
      for (int j = 0; j < d; ++j) {
        Gb.row(j) = G.row(idx[static_cast<size_t>(j)]);
        wb(j) = w(idx[static_cast<size_t>(j)]);
      }
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(Gb);
      if (!lu.isInvertible()) return;
      const Eigen::VectorXd x = lu.solve(wb);
      if (((G * x - w).array() <= 1e-9).all()) best = std::min(best, c.dot(x));
      return;
    }
    for (int i = start; i < m; ++i) {
      idx[static_cast<size_t>(depth)] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

// Horizon cost by direct simulation: sum of stage costs plus terminal cost.
inline double stage_cost(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                         const Eigen::MatrixXd& P, int Np, const Eigen::VectorXd& xi,
                         const Eigen::VectorXd& z) {
  const int nu = static_cast<int>(B.cols());
  Eigen::VectorXd x = xi;
  double J = 0.0;
  for (int k = 0; k < Np; ++k) {
    const Eigen::VectorXd u = z.segment(k * nu, nu);
    J += x.dot(Q * x) + u.dot(R * u);
    x = A * x + B * u;
  }
  return J + x.dot(P * x);
}

// Brute-force largest-volume symmetric box inside the thrust/attitude set.
// For a fixed vertical half-width the horizontal half-widths are pinned by
// the bottom corners against the cone and the top corners against the
// sphere, so only the vertical sweep needs a grid.
inline Eigen::Vector3d grid_box(const flatmpc::VcParams& p, double res) {
  double best_vol = -1.0;
  Eigen::Vector3d best = Eigen::Vector3d::Zero();
  const double v3_hi = std::min(p.g, p.T_max - p.g);
  const double t = std::tan(p.eps_max);
  for (double v3 = res; v3 <= v3_hi + 1e-15; v3 += res) {
    const double cone = (p.g - v3) * t;
    const double sph = p.T_max * p.T_max - (p.g + v3) * (p.g + v3);
    const double r2 = std::min(cone * cone, sph);
    if (r2 <= 0.0) continue;
    const double v1 = std::sqrt(0.5 * r2);
    const double vol = v1 * v1 * v3;
    if (vol > best_vol) {
      best_vol = vol;
      best = Eigen::Vector3d(v1, v1, v3);
    }
  }
  return best;
}

// Monte-Carlo volumes of the exact input set and a polytope inside it, from
// a shared uniform sample over the bounding box of the exact set.
struct McVolume {
  double exact = 0.0;
  double poly = 0.0;
};
inline McVolume mc_volume(const flatmpc::VcParams& p, const flatmpc::HPolytope& poly, int n,
                          unsigned seed) {
  std::mt19937 rng(seed);
  const double R = p.T_max * std::sin(p.eps_max);
  std::uniform_real_distribution<double> ur(-R, R), uz(-p.g, p.T_max - p.g);
  int in_exact = 0, in_poly = 0;
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d v(ur(rng), ur(rng), uz(rng));
    if (flatmpc::vc_contains(v, p)) ++in_exact;
    if (poly.contains(v)) ++in_poly;
  }
  McVolume out;
  out.exact = static_cast<double>(in_exact) / n;
  out.poly = static_cast<double>(in_poly) / n;
  return out;
}

// Random bounded polygon in H-rep: a box plus a few random cuts that keep a
// neighborhood of the origin.
inline flatmpc::HPolytope random_polytope_2d(std::mt19937& rng) {
  std::uniform_int_distribution<int> nd(3, 8);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI), off(0.4, 2.0);
  const int extra = nd(rng);
  Eigen::MatrixXd H(4 + extra, 2);
  Eigen::VectorXd h(4 + extra);
  H.topRows(4) << 1, 0, -1, 0, 0, 1, 0, -1;
  h.head(4).setConstant(2.0);
  for (int i = 0; i < extra; ++i) {
    const double a = ang(rng);
    H.row(4 + i) << std::cos(a), std::sin(a);
    h(4 + i) = off(rng);
  }
  return flatmpc::HPolytope{H, h};
}

inline Eigen::MatrixXd random_spd(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = u(rng);
  return M.transpose() * M + 0.2 * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace oracles
