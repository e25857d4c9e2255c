#include "flatmpc/implicit.hpp"

#include <chrono>

#include "flatmpc/flat_model.hpp"

namespace flatmpc {

ImpcAxis::ImpcAxis(const AxisSpec& spec) : pqp_(condense(spec)) {
  llt_.compute(pqp_.H);
  if (llt_.info() != Eigen::Success)
    throw Error("qp_not_convex", "condensed Hessian is not positive definite");
}

ImpcAxis::Result ImpcAxis::solve(const Eigen::Vector2d& xi) const {
  Result out;
  const auto t0 = std::chrono::steady_clock::now();
  if (((pqp_.param_H * xi - pqp_.param_h).array() > 1e-9).any()) {
    out.solve_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;  // state violates the step-0 box, QP infeasible by definition
  }
  const QPSolution sol = solve_qp(llt_, pqp_.Ftheta * xi, pqp_.G, pqp_.w + pqp_.S * xi);
  const auto t1 = std::chrono::steady_clock::now();
  out.solve_time_s = std::chrono::duration<double>(t1 - t0).count();
  if (sol.status == QpStatus::infeasible) return out;
  out.status = sol.status;
  out.z = sol.z;
  out.v = sol.z(0);
  return out;
}

CoupledSpec build_coupled_spec(const std::array<AxisSpec, 3>& axes, const HPolytope& vc_poly) {
  CoupledSpec cs;
  cs.Np = axes[0].Np;
  cs.A = Eigen::MatrixXd::Zero(6, 6);
  cs.B = Eigen::MatrixXd::Zero(6, 3);
  cs.Q = Eigen::MatrixXd::Zero(6, 6);
  cs.R = Eigen::MatrixXd::Zero(3, 3);
  cs.P = Eigen::MatrixXd::Zero(6, 6);
  cs.Vc_poly = vc_poly;

  InscribedBox nominal;
  for (int i = 0; i < 3; ++i) nominal.vbar(i) = axes[static_cast<size_t>(i)].vbar;
  const InscribedBox tight = scaled_tracking_box(normalize_rows(vc_poly), nominal);

  HPolytope X6, Xf6;
  for (int i = 0; i < 3; ++i) {
    const AxisSpec& ax = axes[static_cast<size_t>(i)];
    if (ax.Np != cs.Np) throw Error("bad_horizon", "stacked axes need one shared horizon");
    cs.A.block(2 * i, 2 * i, 2, 2) = ax.sys.A;
    cs.B.block(2 * i, i, 2, 1) = ax.sys.B;
    cs.Q.block(2 * i, 2 * i, 2, 2) = ax.Q;
    cs.R(i, i) = ax.R;
    cs.P.block(2 * i, 2 * i, 2, 2) = ax.P;

    const TerminalIngredients ti =
        terminal_ingredients(ax.sys, ax.Q, ax.R, ax.pbar, ax.velbar, tight.vbar(i));
    X6 = (i == 0) ? ax.state_box() : HPolytope::product(X6, ax.state_box());
    Xf6 = (i == 0) ? ti.Xf : HPolytope::product(Xf6, ti.Xf);
  }
  cs.X = X6;
  cs.Xf = Xf6;
  return cs;
}

CoupledImpc::CoupledImpc(const CoupledSpec& spec)
    : spec_(spec),
      pqp_(condense_generic(spec.A, spec.B, spec.Q, spec.R, spec.P, spec.Np,
                            normalize_rows(spec.Vc_poly), spec.X, spec.Xf)) {
  llt_.compute(pqp_.H);
  if (llt_.info() != Eigen::Success)
    throw Error("qp_not_convex", "condensed Hessian is not positive definite");
}

CoupledImpc::Result CoupledImpc::solve(const Eigen::VectorXd& zeta) const {
  Result out;
  const auto t0 = std::chrono::steady_clock::now();
  if (((pqp_.param_H * zeta - pqp_.param_h).array() > 1e-9).any()) {
    out.solve_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }
  const QPSolution sol =
      solve_qp(llt_, pqp_.Ftheta * zeta, pqp_.G, pqp_.w + pqp_.S * zeta);
  const auto t1 = std::chrono::steady_clock::now();
  out.solve_time_s = std::chrono::duration<double>(t1 - t0).count();
  if (sol.status == QpStatus::infeasible) return out;
  out.status = sol.status;
  out.v = sol.z.head<3>();
  return out;
}

}  // namespace flatmpc
