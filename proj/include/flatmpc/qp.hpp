#pragma once

#include <Eigen/Dense>

#include <vector>

#include "flatmpc/types.hpp"

namespace flatmpc {

// Strictly convex QP:  min 1/2 z'Hz + f'z  s.t.  G z <= w
struct QPProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd G;  // m x n, may have zero rows
  Eigen::VectorXd w;
};

enum class QpStatus { optimal, infeasible, degenerate };

struct QPSolution {
  QpStatus status = QpStatus::infeasible;
  Eigen::VectorXd z;
  Eigen::VectorXd lambda;       // full-length multipliers, zero off the active set
  std::vector<int> active_set;  // ascending row indices
  int iterations = 0;
};

// Dense dual active-set solver. Starts from the unconstrained minimizer and
// adds violated constraints one at a time, so no feasible start is needed and
// the final active set is linearly independent and exact, which the critical
// region enumeration relies on. Tie-breaks are lowest-index throughout, which
// makes the solve deterministic across runs.
//
// status=degenerate flags weakly active constraints (lambda <= 1e-9) and still
// carries the minimizer; infeasible constraint systems are reported via
// status, never by throwing. Throws "qp_cycling" if the iteration cap trips
// and "qp_not_convex" when H fails the positive definiteness check.
QPSolution solve_qp(const QPProblem& p);

// Same solver with a caller-held Cholesky factor of H, for the hot paths that
// solve many QPs sharing one Hessian. Skips the eigenvalue check.
QPSolution solve_qp(const Eigen::LLT<Eigen::MatrixXd>& Hllt, const Eigen::VectorXd& f,
                    const Eigen::MatrixXd& G, const Eigen::VectorXd& w);

}  // namespace flatmpc
