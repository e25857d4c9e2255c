#pragma once

#include <Eigen/Dense>

#include <vector>

#include "flatmpc/polytope.hpp"
#include "flatmpc/types.hpp"

namespace flatmpc {

// One axis of the decoupled regulation problem.
struct AxisSpec {
  LinearSystem2D sys;
  Eigen::Matrix2d Q = Eigen::Matrix2d::Zero();
  double R = 0.0;
  Eigen::Matrix2d P = Eigen::Matrix2d::Zero();
  int Np = 0;
  double vbar = 0.0;    // input half-width (m/s^2)
  double pbar = 0.0;    // position bound (m)
  double velbar = 0.0;  // velocity bound (m/s)
  HPolytope Xf;

  HPolytope state_box() const {
    Eigen::VectorXd half(2);
    half << pbar, velbar;
    return HPolytope::box(half);
  }
  HPolytope input_box() const {
    Eigen::VectorXd half(1);
    half << vbar;
    return HPolytope::box(half);
  }
};

// Condensed horizon problem over the stacked input sequence z:
//   J(xi, z) = z'Hz + 2 xi'Ftheta'z + xi'Qc xi,   G z <= w + S xi,
// plus parameter-only rows (the step-0 state box) that constrain xi alone.
// Passing (H, Ftheta xi) to the QP solver scales the cost by 1/2, which
// leaves minimizer and active set unchanged.
struct ParametricQP {
  Eigen::MatrixXd H;
  Eigen::MatrixXd Ftheta;
  Eigen::MatrixXd G;
  Eigen::VectorXd w;
  Eigen::MatrixXd S;
  Eigen::MatrixXd Qc;
  Eigen::MatrixXd param_H;
  Eigen::VectorXd param_h;

  int horizon_vars() const { return static_cast<int>(H.rows()); }
  double cost(const Eigen::VectorXd& xi, const Eigen::VectorXd& z) const {
    return z.dot(H * z) + 2.0 * xi.dot(Ftheta.transpose() * z) + xi.dot(Qc * xi);
  }
};

struct CriticalRegion {
  HPolytope region;                    // canonical, one row per facet
  Eigen::MatrixXd F;                   // optimal sequence z*(xi) = F xi + mu
  Eigen::VectorXd mu;
  std::vector<int> active_set;         // ascending constraint rows of the QP
  double cheb_radius = 0.0;
  Eigen::Vector2d cheb_center = Eigen::Vector2d::Zero();
};

struct AxisController {
  AxisSpec spec;
  std::vector<CriticalRegion> regions;
};

struct TerminalIngredients {
  Eigen::Matrix2d P;
  Eigen::MatrixXd K;  // 1 x 2
  HPolytope Xf;
};

// Generic state elimination for x+ = Ax + Bu over Np steps with stage cost
// x'Qx + u'Ru, terminal cost x'Px, input set U at steps 0..Np-1, state set X
// at steps 0..Np-1 (step 0 becomes the parameter rows) and terminal set Xf.
// Constraint row order: input rows step-major, then state rows for steps
// 1..Np-1, then terminal rows.
ParametricQP condense_generic(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                              const Eigen::MatrixXd& P, int Np, const HPolytope& input_set,
                              const HPolytope& state_set, const HPolytope& terminal_set);

ParametricQP condense(const AxisSpec& spec);

// P from the Riccati equation, K the LQR gain, Xf the maximal positive
// invariant set of A - BK inside the state box with |Kxi| <= vbar.
TerminalIngredients terminal_ingredients(const LinearSystem2D& sys, const Eigen::Matrix2d& Q,
                                         double R, double pbar, double velbar, double vbar);

// Exhaustive critical-region exploration over the parameter domain. Every
// optimal active set reachable from the seed by facet crossings gets one
// region; a deterministic sampling sweep then fills anything the walk missed.
// Regions are stored by descending Chebyshev radius so sequential point
// location tends to hit the common ones first.
AxisController enumerate_regions(const ParametricQP& pqp, const HPolytope& param_domain,
                                 int region_budget = 100000);

}  // namespace flatmpc
