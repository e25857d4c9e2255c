#include "flatmpc/dare.hpp"

#include <cmath>
#include <limits>

namespace flatmpc {

double spectral_radius(const Eigen::MatrixXd& M) {
  return M.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  const Eigen::MatrixXd At = A.transpose();
  const Eigen::MatrixXd Bt = B.transpose();

  Eigen::MatrixXd P = Q;
  const double blowup = 1e14 * (1.0 + Q.norm());
  constexpr long max_iter = 1000000;
  for (long it = 0; it < max_iter; ++it) {
    const Eigen::MatrixXd BtPB = R + Bt * P * B;
    const Eigen::MatrixXd Pn =
        At * P * A - At * P * B * BtPB.ldlt().solve(Bt * P * A) + Q;
    const double diff = (Pn - P).cwiseAbs().maxCoeff();
    P = 0.5 * (Pn + Pn.transpose());
    if (P.norm() > blowup)
      throw Error("dare_unstabilizable", "Riccati iterates diverge; (A,B) not stabilizable");
    if (diff <= 1e-12) {
      // residual guard: ||P - (A'PA - A'PB(R+B'PB)^-1 B'PA + Q)||_F <= 1e-8 ||P||_F
      const Eigen::MatrixXd res =
          P - (At * P * A - At * P * B * (R + Bt * P * B).ldlt().solve(Bt * P * A) + Q);
      if (res.norm() > 1e-8 * std::max(1.0, P.norm()))
        throw Error("dare_diverged", "Riccati fixed point failed the residual check");
      return P;
    }
  }
  throw Error("dare_diverged", "Riccati iteration hit the cap without converging");
}

Eigen::MatrixXd lqr_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                         const Eigen::MatrixXd& P) {
  (void)Q;
  const Eigen::MatrixXd K =
      (R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
  const double rho = spectral_radius(A - B * K);
  if (!(rho < 1.0))
    throw Error("lqr_unstable", "closed loop A - BK has spectral radius " + std::to_string(rho));
  return K;
}

}  // namespace flatmpc
