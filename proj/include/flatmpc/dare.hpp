#pragma once

#include <Eigen/Dense>

#include "flatmpc/types.hpp"

namespace flatmpc {

// Discrete algebraic Riccati equation, solved by the fixed-point recursion
//   P <- A'PA - A'PB (R + B'PB)^-1 B'PA + Q
// starting from P = Q. Convergence threshold 1e-12 on the max entry change,
// iteration cap 1e6. Throws "dare_diverged" on cap, "dare_unstabilizable"
// when the iterates blow up.
Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

// Infinite-horizon LQR gain K = (R + B'PB)^-1 B'PA for P from solve_dare.
// Closed loop is A - BK with the local law v = -K x; throws "lqr_unstable"
// if the spectral radius of A - BK is not strictly below one.
Eigen::MatrixXd lqr_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                         const Eigen::MatrixXd& P);

double spectral_radius(const Eigen::MatrixXd& M);

}  // namespace flatmpc
