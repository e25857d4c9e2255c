#pragma once

#include <Eigen/Dense>

#include "flatmpc/types.hpp"

namespace flatmpc {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;
  Eigen::VectorXd x;
};

// Minimizes c'x over {x : Gx <= w} with x free. Dense two-phase simplex
// (free variables split, slacks/artificials added) with Bland's rule, so the
// pivot sequence is deterministic and finite. Meant for the small polytope
// side problems in this project, not large-scale LP.
LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& G,
                  const Eigen::VectorXd& w);

}  // namespace flatmpc
