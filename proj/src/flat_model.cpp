#include "flatmpc/flat_model.hpp"

#include <algorithm>
#include <cmath>

namespace flatmpc {

bool in_u(const PhysicalInput& u, const VcParams& p, double tol) {
  return u.T >= -tol && u.T <= p.T_max + tol && std::abs(u.phi) <= p.eps_max + tol &&
         std::abs(u.theta) <= p.eps_max + tol;
}

Eigen::Vector3d plant_accel(const PhysicalInput& u, double psi, double g) {
  const double cphi = std::cos(u.phi), sphi = std::sin(u.phi);
  const double cth = std::cos(u.theta), sth = std::sin(u.theta);
  const double cpsi = std::cos(psi), spsi = std::sin(psi);
  return {u.T * (cphi * sth * cpsi + sphi * spsi),
          u.T * (cphi * sth * spsi - sphi * cpsi),
          -g + u.T * cphi * cth};
}

PhysicalInput flat_to_physical(const Eigen::Vector3d& v, double psi, double g,
                               bool* singular_hover) {
  if (singular_hover) *singular_hover = false;
  const double vz = v(2) + g;
  if (vz < 0.0) throw Error("outside_flat_domain", "commanded v3 below free fall");
  const double T = std::sqrt(v(0) * v(0) + v(1) * v(1) + vz * vz);
  PhysicalInput u;
  if (T == 0.0) {
    if (singular_hover) *singular_hover = true;
    return u;
  }
  u.T = T;
  const double spsi = std::sin(psi), cpsi = std::cos(psi);
  double s = (v(0) * spsi - v(1) * cpsi) / T;
  s = std::clamp(s, -1.0, 1.0);
  u.phi = std::asin(s);
  // vz >= 0, so atan2 agrees with arctan of the ratio and stays defined at vz = 0.
  u.theta = std::atan2(v(0) * cpsi + v(1) * spsi, vz);
  return u;
}

bool vc_contains(const Eigen::Vector3d& v, const VcParams& p, double tol) {
  const double vz = v(2) + p.g;
  const double planar = v(0) * v(0) + v(1) * v(1);
  const double t = std::tan(p.eps_max);
  return planar + vz * vz <= p.T_max * p.T_max + tol && planar <= vz * vz * t * t + tol &&
         vz >= -tol;
}

std::vector<Eigen::VectorXd> vc_generators(const VcParams& p, int l1, int l2) {
  p.validate();
  if (l1 < 3 || l2 < 1) throw Error("hull_degenerate", "need l1 >= 3 and l2 >= 1");
  const double R = p.T_max * std::sin(p.eps_max);
  const double v3_ring = p.T_max * std::cos(p.eps_max) - p.g;

  std::vector<Eigen::VectorXd> gen;
  auto push_unique = [&gen](const Eigen::Vector3d& q) {
    for (const auto& r : gen)
      if ((r - q).norm() <= 1e-12) return;
    gen.push_back(q);
  };

  push_unique(Eigen::Vector3d(0.0, 0.0, -p.g));
  std::vector<double> alphas(static_cast<size_t>(l1));
  for (int i = 0; i < l1; ++i)
    alphas[static_cast<size_t>(i)] = 2.0 * M_PI * static_cast<double>(i) / (l1 - 1);
  for (double a : alphas) push_unique(Eigen::Vector3d(R * std::cos(a), R * std::sin(a), v3_ring));
  for (int j = 0; j < l2; ++j) {
    const double r = (l2 == 1) ? 0.0 : R * static_cast<double>(j) / (l2 - 1);
    const double v3 = std::sqrt(std::max(0.0, p.T_max * p.T_max - r * r)) - p.g;
    for (double a : alphas) push_unique(Eigen::Vector3d(r * std::cos(a), r * std::sin(a), v3));
  }
  return gen;
}

HPolytope build_vc_polytope(const VcParams& p, int l1, int l2) {
  return hull(vc_generators(p, l1, l2));
}

InscribedBox max_inscribed_box(const VcParams& p) {
  p.validate();
  const double g = p.g;
  const double c = (-2.0 * g + std::sqrt(g * g + 3.0 * p.T_max * p.T_max)) / 3.0;
  const double t = std::tan(p.eps_max);
  InscribedBox box;
  if (2.0 * c * (g + c) - t * t * (c - g) * (c - g) < 0.0) {
    // Sphere-limited: the top corners sit on the thrust sphere.
    box.vbar(2) = c;
    box.vbar(0) = box.vbar(1) = std::sqrt(c * (c + g));
  } else {
    // Cone-limited: the bottom corners sit on the attitude cone.
    box.vbar(2) = g / 3.0;
    box.vbar(0) = box.vbar(1) = t * std::sqrt(box.vbar(2) * (g - box.vbar(2)));
  }
  return box;
}

InscribedBox scaled_tracking_box(const HPolytope& delta_vc, const InscribedBox& nominal) {
  double beta = 1.0;
  for (int i = 0; i < delta_vc.rows(); ++i) {
    const double denom = delta_vc.H.row(i).cwiseAbs().dot(nominal.vbar);
    if (delta_vc.h(i) <= 0.0)
      throw Error("tracking_box_empty", "reference leaves no input margin");
    if (denom > 0.0) beta = std::min(beta, delta_vc.h(i) / denom);
  }
  if (!(beta > 0.0)) throw Error("tracking_box_empty", "reference leaves no input margin");
  InscribedBox out;
  out.vbar = beta * nominal.vbar;
  return out;
}

}  // namespace flatmpc
