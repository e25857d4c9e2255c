#include "flatmpc/synth.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <random>

#include "flatmpc/dare.hpp"
#include "flatmpc/qp.hpp"

namespace flatmpc {

ParametricQP condense_generic(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                              const Eigen::MatrixXd& P, int Np, const HPolytope& input_set,
                              const HPolytope& state_set, const HPolytope& terminal_set) {
  const int nx = static_cast<int>(A.rows());
  const int nu = static_cast<int>(B.cols());
  if (Np < 1) throw Error("bad_horizon", "prediction horizon must be at least 1");

  std::vector<Eigen::MatrixXd> Apow(static_cast<size_t>(Np) + 1);
  Apow[0] = Eigen::MatrixXd::Identity(nx, nx);
  for (int j = 1; j <= Np; ++j) Apow[static_cast<size_t>(j)] = Apow[static_cast<size_t>(j - 1)] * A;

  Eigen::MatrixXd Phi(Np * nx, nx);
  Eigen::MatrixXd Gamma = Eigen::MatrixXd::Zero(Np * nx, Np * nu);
  for (int j = 1; j <= Np; ++j) {
    Phi.middleRows((j - 1) * nx, nx) = Apow[static_cast<size_t>(j)];
    for (int i = 0; i < j; ++i)
      Gamma.block((j - 1) * nx, i * nu, nx, nu) = Apow[static_cast<size_t>(j - 1 - i)] * B;
  }

  Eigen::MatrixXd Qt = Eigen::MatrixXd::Zero(Np * nx, Np * nx);
  for (int j = 0; j < Np - 1; ++j) Qt.block(j * nx, j * nx, nx, nx) = Q;
  Qt.block((Np - 1) * nx, (Np - 1) * nx, nx, nx) = P;
  Eigen::MatrixXd Rb = Eigen::MatrixXd::Zero(Np * nu, Np * nu);
  for (int j = 0; j < Np; ++j) Rb.block(j * nu, j * nu, nu, nu) = R;

  ParametricQP pqp;
  pqp.H = Gamma.transpose() * Qt * Gamma + Rb;
  pqp.H = 0.5 * (pqp.H + pqp.H.transpose()).eval();
  pqp.Ftheta = Gamma.transpose() * Qt * Phi;
  pqp.Qc = Q + Phi.transpose() * Qt * Phi;

  const int mi = input_set.rows();
  const int mx = state_set.rows();
  const int mf = terminal_set.rows();
  const int m = mi * Np + mx * (Np - 1) + mf;
  pqp.G = Eigen::MatrixXd::Zero(m, Np * nu);
  pqp.S = Eigen::MatrixXd::Zero(m, nx);
  pqp.w.resize(m);

  int r = 0;
  for (int j = 0; j < Np; ++j) {
    pqp.G.block(r, j * nu, mi, nu) = input_set.H;
    pqp.w.segment(r, mi) = input_set.h;
    r += mi;
  }
  for (int j = 1; j < Np; ++j) {
    pqp.G.middleRows(r, mx) = state_set.H * Gamma.middleRows((j - 1) * nx, nx);
    pqp.S.middleRows(r, mx) = -state_set.H * Apow[static_cast<size_t>(j)];
    pqp.w.segment(r, mx) = state_set.h;
    r += mx;
  }
  pqp.G.middleRows(r, mf) = terminal_set.H * Gamma.middleRows((Np - 1) * nx, nx);
  pqp.S.middleRows(r, mf) = -terminal_set.H * Apow[static_cast<size_t>(Np)];
  pqp.w.segment(r, mf) = terminal_set.h;

  pqp.param_H = state_set.H;
  pqp.param_h = state_set.h;
  return pqp;
}

ParametricQP condense(const AxisSpec& spec) {
  Eigen::MatrixXd R(1, 1);
  R(0, 0) = spec.R;
  return condense_generic(spec.sys.A, spec.sys.B, spec.Q, R, spec.P, spec.Np,
                          spec.input_box(), spec.state_box(), spec.Xf);
}

TerminalIngredients terminal_ingredients(const LinearSystem2D& sys, const Eigen::Matrix2d& Q,
                                         double R, double pbar, double velbar, double vbar) {
  Eigen::MatrixXd Rm(1, 1);
  Rm(0, 0) = R;
  TerminalIngredients out;
  out.P = solve_dare(sys.A, sys.B, Q, Rm);
  out.K = lqr_gain(sys.A, sys.B, Q, Rm, out.P);

  Eigen::VectorXd state_half(2), input_half(1);
  state_half << pbar, velbar;
  input_half << vbar;
  const Eigen::MatrixXd A_cl = sys.A - sys.B * out.K;
  out.Xf = mpi_set(A_cl, HPolytope::box(state_half), out.K, HPolytope::box(input_half));
  if (out.Xf.h.minCoeff() <= 0.0)
    throw Error("empty_polytope", "terminal set lost the origin");
  return out;
}

namespace {

struct RegionWork {
  CriticalRegion cr;
  std::vector<Eigen::Vector2d> verts;
};

}  // namespace

AxisController enumerate_regions(const ParametricQP& pqp, const HPolytope& param_domain,
                                 int region_budget) {
  const int n = pqp.horizon_vars();
  const int m = static_cast<int>(pqp.G.rows());

  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (pqp.H + pqp.H.transpose()));
  if (llt.info() != Eigen::Success)
    throw Error("qp_not_convex", "condensed Hessian is not positive definite");
  const Eigen::MatrixXd Hinv = llt.solve(Eigen::MatrixXd::Identity(n, n));

  HPolytope domain = normalize_rows(param_domain);

  std::vector<RegionWork> work;
  std::map<std::vector<int>, char> visited;
  std::deque<Eigen::Vector2d> queue;

  auto locate_existing = [&work](const Eigen::Vector2d& xi) {
    for (const RegionWork& rw : work)
      if (rw.cr.region.contains(xi, 1e-9)) return true;
    return false;
  };

  auto process = [&](const Eigen::Vector2d& xi) {
    if (!domain.contains(xi, 1e-9)) return;
    if (locate_existing(xi)) return;

    QPSolution sol = solve_qp(llt, pqp.Ftheta * xi, pqp.G, pqp.w + pqp.S * xi);
    if (sol.status == QpStatus::infeasible) return;
    std::vector<int> act;
    for (int i : sol.active_set)
      if (sol.status != QpStatus::degenerate || sol.lambda(i) > 1e-9) act.push_back(i);
    if (visited.count(act)) return;
    visited[act] = 1;

    const int a = static_cast<int>(act.size());
    Eigen::MatrixXd F;
    Eigen::VectorXd mu;
    Eigen::MatrixXd Lam(a, 2);
    Eigen::VectorXd nu0(a);
    if (a == 0) {
      F = -Hinv * pqp.Ftheta;
      mu = Eigen::VectorXd::Zero(n);
    } else {
      Eigen::MatrixXd Ga(a, n), Sa(a, 2);
      Eigen::VectorXd wa(a);
      for (int i = 0; i < a; ++i) {
        Ga.row(i) = pqp.G.row(act[static_cast<size_t>(i)]);
        Sa.row(i) = pqp.S.row(act[static_cast<size_t>(i)]);
        wa(i) = pqp.w(act[static_cast<size_t>(i)]);
      }
      const Eigen::MatrixXd HiGt = Hinv * Ga.transpose();
      Eigen::LDLT<Eigen::MatrixXd> Mldlt((Ga * HiGt).eval());
      Lam = -Mldlt.solve(Ga * Hinv * pqp.Ftheta + Sa);
      nu0 = -Mldlt.solve(wa);
      F = -Hinv * pqp.Ftheta - HiGt * Lam;
      mu = -HiGt * nu0;
    }

    // Region rows: primal feasibility of inactive rows, dual feasibility of
    // active rows, and the parameter domain.
    Eigen::MatrixXd Hr(m + domain.rows(), 2);
    Eigen::VectorXd hr(m + domain.rows());
    int r = 0;
    int ai = 0;
    for (int i = 0; i < m; ++i) {
      if (ai < a && act[static_cast<size_t>(ai)] == i) {
        Hr.row(r) = -Lam.row(ai);
        hr(r) = nu0(ai);
        ++ai;
      } else {
        Hr.row(r) = pqp.G.row(i) * F - pqp.S.row(i);
        hr(r) = pqp.w(i) - pqp.G.row(i).dot(mu);
      }
      ++r;
    }
    Hr.bottomRows(domain.rows()) = domain.H;
    hr.tail(domain.rows()) = domain.h;

    Canon2D canon = canonicalize_2d(Hr, hr);
    if (canon.empty || !canon.bounded || canon.cheb_radius <= 1e-8) return;

    if (static_cast<int>(work.size()) >= region_budget)
      throw Error("region_budget_exceeded", "critical region cap exceeded");

    RegionWork rw;
    rw.cr.region = canon.poly;
    rw.cr.F = F;
    rw.cr.mu = mu;
    rw.cr.active_set = act;
    rw.cr.cheb_radius = canon.cheb_radius;
    rw.cr.cheb_center = canon.cheb_center;
    rw.verts = canon.verts;
    work.push_back(std::move(rw));

    const int ne = static_cast<int>(canon.verts.size());
    for (int e = 0; e < ne; ++e) {
      const Eigen::Vector2d mid =
          0.5 * (canon.verts[static_cast<size_t>(e)] + canon.verts[static_cast<size_t>((e + 1) % ne)]);
      const Eigen::Vector2d step = canon.poly.H.row(e).transpose();
      queue.push_back(mid + 1e-6 * step);
    }
  };

  auto drain = [&] {
    while (!queue.empty()) {
      const Eigen::Vector2d xi = queue.front();
      queue.pop_front();
      process(xi);
    }
  };

  // Feasibility of the seed states decides whether there is anything to map.
  const Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  auto [dom_center, dom_radius] = chebyshev(domain);
  (void)dom_radius;
  queue.push_back(origin);
  queue.push_back(dom_center.head<2>());
  drain();
  if (work.empty()) throw Error("empty_feasible_set", "no feasible parameter found from seeds");

  // Deterministic sampling sweep over the domain box catches any region the
  // facet walk could not reach (thin necks, degenerate transitions).
  VPolytope dom_verts = vertices(domain);
  Eigen::Vector2d lo = dom_verts.vertices.front().head<2>(), hi = lo;
  for (const auto& v : dom_verts.vertices) {
    lo = lo.cwiseMin(v.head<2>());
    hi = hi.cwiseMax(v.head<2>());
  }
  std::mt19937 rng(20240801u);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int s = 0; s < 4000; ++s) {
    Eigen::Vector2d xi(lo.x() + (hi.x() - lo.x()) * unif(rng),
                       lo.y() + (hi.y() - lo.y()) * unif(rng));
    process(xi);
    drain();
  }

  std::stable_sort(work.begin(), work.end(), [](const RegionWork& a, const RegionWork& b) {
    if (a.cr.cheb_radius != b.cr.cheb_radius) return a.cr.cheb_radius > b.cr.cheb_radius;
    return a.cr.active_set < b.cr.active_set;
  });

  AxisController ctrl;
  ctrl.regions.reserve(work.size());
  for (RegionWork& rw : work) ctrl.regions.push_back(std::move(rw.cr));
  return ctrl;
}

}  // namespace flatmpc
