#include "flatmpc/runtime.hpp"

#include <chrono>

namespace flatmpc {

void TrackingReference::validate(const LinearSystem2D& sys) const {
  if (xi_ref.empty()) throw Error("reference_inconsistent", "empty reference");
  if (v_ref.size() + 1 != xi_ref.size())
    throw Error("reference_inconsistent", "reference input/state length mismatch");
  for (size_t k = 0; k < v_ref.size(); ++k) {
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector2d pred =
          sys.A * xi_ref[k][static_cast<size_t>(i)] + sys.B * v_ref[k](i);
      if ((xi_ref[k + 1][static_cast<size_t>(i)] - pred).norm() > 1e-9)
        throw Error("reference_inconsistent",
                    "reference does not satisfy the plant recursion");
    }
  }
  for (const auto& v : v_ref) {
    bool inside = false;
    for (const auto& g : vc_ref_bound.vertices)
      if ((g - v).norm() <= 1e-9) inside = true;
    // Vertex coincidence is sufficient for generated references; otherwise
    // accept any v inside the hull of the generators via a convexity check
    // that the generators bound each coordinate.
    if (!inside && !vc_ref_bound.vertices.empty()) {
      Eigen::Vector3d lo = vc_ref_bound.vertices.front().head<3>(), hi = lo;
      for (const auto& g : vc_ref_bound.vertices) {
        lo = lo.cwiseMin(g.head<3>());
        hi = hi.cwiseMax(g.head<3>());
      }
      if ((v.array() < lo.array() - 1e-9).any() || (v.array() > hi.array() + 1e-9).any())
        throw Error("reference_inconsistent", "reference input escapes its declared bound");
    }
  }
}

int locate(const AxisController& ctrl, const Eigen::Vector2d& xi) {
  for (size_t l = 0; l < ctrl.regions.size(); ++l)
    if (ctrl.regions[l].region.contains(xi, 1e-9)) return static_cast<int>(l);
  return -1;
}

double evaluate(const AxisController& ctrl, const Eigen::Vector2d& xi) {
  const int l = locate(ctrl, xi);
  if (l < 0)
    throw Error("infeasible_state", "state outside the covered feasible set");
  const CriticalRegion& cr = ctrl.regions[static_cast<size_t>(l)];
  return cr.F.row(0).dot(xi) + cr.mu(0);
}

StepResult control_step(const ControllerBundle& ctrls,
                        const std::array<Eigen::Vector2d, 3>& state, double psi, double g,
                        const TrackingReference* ref, int k) {
  StepResult out;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 3; ++i) {
    Eigen::Vector2d xi = state[static_cast<size_t>(i)];
    if (ref) xi -= ref->state_at(k)[static_cast<size_t>(i)];
    const int l = locate(ctrls.axes[static_cast<size_t>(i)], xi);
    if (l < 0)
      throw Error("infeasible_state", "axis " + std::to_string(i + 1) +
                                          " left the covered feasible set");
    const CriticalRegion& cr = ctrls.axes[static_cast<size_t>(i)].regions[static_cast<size_t>(l)];
    out.region[static_cast<size_t>(i)] = l;
    out.v(i) = cr.F.row(0).dot(xi) + cr.mu(0);
  }
  const auto t1 = std::chrono::steady_clock::now();
  out.eval_time_s = std::chrono::duration<double>(t1 - t0).count();
  if (ref) out.v += ref->input_at(k);
  out.u = flat_to_physical(out.v, psi, g);
  return out;
}

}  // namespace flatmpc
