#pragma once

#include <Eigen/Dense>

#include <array>

#include "flatmpc/qp.hpp"
#include "flatmpc/synth.hpp"

namespace flatmpc {

// Decoupled per-axis online QP sharing the explicit controller's condensed
// problem. The Hessian factor is cached; each solve builds the linear term
// and right-hand side from the current state.
class ImpcAxis {
 public:
  explicit ImpcAxis(const AxisSpec& spec);

  struct Result {
    QpStatus status = QpStatus::infeasible;
    double v = 0.0;          // first input of the optimal sequence
    Eigen::VectorXd z;       // full optimal sequence
    double solve_time_s = 0.0;
  };
  Result solve(const Eigen::Vector2d& xi) const;

  const ParametricQP& pqp() const { return pqp_; }

 private:
  ParametricQP pqp_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// Stacked three-axis problem with a polytopic flat-input set coupling the
// axes (the per-axis box is replaced by the cone-like polytope).
struct CoupledSpec {
  Eigen::MatrixXd A;   // 6x6 block diagonal
  Eigen::MatrixXd B;   // 6x3
  Eigen::MatrixXd Q;   // 6x6
  Eigen::MatrixXd R;   // 3x3
  Eigen::MatrixXd P;   // 6x6
  int Np = 0;
  HPolytope Vc_poly;   // 3D input polytope
  HPolytope X;         // 6D stacked state box
  HPolytope Xf;        // 6D terminal set
};

// Terminal set: per-axis invariant sets recomputed under the largest scaled
// box inside Vc_poly, stacked as a product. The closed loop is block diagonal
// and that box is separable, so the product is exactly the stacked invariant
// set for those tightened bounds.
CoupledSpec build_coupled_spec(const std::array<AxisSpec, 3>& axes, const HPolytope& vc_poly);

class CoupledImpc {
 public:
  explicit CoupledImpc(const CoupledSpec& spec);

  struct Result {
    QpStatus status = QpStatus::infeasible;
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    double solve_time_s = 0.0;
  };
  Result solve(const Eigen::VectorXd& zeta) const;  // zeta in R^6

  const CoupledSpec& spec() const { return spec_; }
  const ParametricQP& pqp() const { return pqp_; }

 private:
  CoupledSpec spec_;
  ParametricQP pqp_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

}  // namespace flatmpc
