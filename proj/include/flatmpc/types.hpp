#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace flatmpc {

// Error with a stable machine-readable code next to the human message.
// Codes are what tests and the CLI exit-code ladder key on.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Discrete double integrator sampled at ts:
//   x+ = [1 ts; 0 1] x + [ts^2/2; ts] v
struct LinearSystem2D {
  Eigen::Matrix2d A;
  Eigen::Vector2d B;
  double ts = 0.0;

  static LinearSystem2D double_integrator(double ts) {
    if (!(ts > 0.0)) throw Error("bad_sampling_time", "sampling time must be positive");
    LinearSystem2D s;
    s.A << 1.0, ts, 0.0, 1.0;
    s.B << 0.5 * ts * ts, ts;
    s.ts = ts;
    return s;
  }

  bool controllable(double tol = 1e-12) const {
    Eigen::Matrix2d C;
    C.col(0) = B;
    C.col(1) = A * B;
    return std::abs(C.determinant()) > tol;
  }
};

}  // namespace flatmpc
