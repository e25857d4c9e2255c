#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <vector>

#include "flatmpc/controller_io.hpp"
#include "flatmpc/flat_model.hpp"
#include "flatmpc/synth.hpp"

namespace flatmpc {

// Sampled reference satisfying the plant recursion exactly: for every k,
// xi_ref[k+1] = A xi_ref[k] + B v_ref[k] per axis. v_ref has one fewer
// sample than xi_ref; past the end the tail input is reused.
struct TrackingReference {
  std::vector<std::array<Eigen::Vector2d, 3>> xi_ref;
  std::vector<Eigen::Vector3d> v_ref;
  VPolytope vc_ref_bound;  // hull generators enclosing all v_ref samples

  void validate(const LinearSystem2D& sys) const;

  const std::array<Eigen::Vector2d, 3>& state_at(int k) const {
    const size_t i = std::min(static_cast<size_t>(k), xi_ref.size() - 1);
    return xi_ref[i];
  }
  Eigen::Vector3d input_at(int k) const {
    if (v_ref.empty()) return Eigen::Vector3d::Zero();
    const size_t i = std::min(static_cast<size_t>(k), v_ref.size() - 1);
    return v_ref[i];
  }
};

// Sequential point location: index of the first stored region containing xi
// within 1e-9, or -1 when uncovered.
int locate(const AxisController& ctrl, const Eigen::Vector2d& xi);

// First input of the optimal sequence. Throws "infeasible_state" when no
// region contains xi.
double evaluate(const AxisController& ctrl, const Eigen::Vector2d& xi);

struct StepResult {
  PhysicalInput u;
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  std::array<int, 3> region = {-1, -1, -1};
  double eval_time_s = 0.0;  // locate + evaluate over all three axes
};

// One control cycle: per-axis point location and law evaluation (on tracking
// references the law acts on the state error and the reference input is added
// back), then the flat-to-physical transform at the measured yaw.
StepResult control_step(const ControllerBundle& ctrls,
                        const std::array<Eigen::Vector2d, 3>& state, double psi, double g,
                        const TrackingReference* ref, int k);

}  // namespace flatmpc
