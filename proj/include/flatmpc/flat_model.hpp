#pragma once

#include <Eigen/Dense>

#include <vector>

#include "flatmpc/polytope.hpp"
#include "flatmpc/types.hpp"

namespace flatmpc {

// Normalized thrust plus attitude angles, the real plant input.
struct PhysicalInput {
  double T = 0.0;      // m/s^2
  double phi = 0.0;    // rad, roll
  double theta = 0.0;  // rad, pitch
};

struct VcParams {
  double T_max = 0.0;
  double eps_max = 0.0;  // rad, attitude bound shared by roll and pitch
  double g = 9.81;

  void validate() const {
    if (!(T_max > 0.0) || !(eps_max > 0.0) || !(eps_max < 1.5707963267948966) || !(g > 0.0))
      throw Error("bad_vc_params", "need T_max > 0, eps_max in (0, pi/2), g > 0");
  }
};

// Axis-aligned box |v_i| <= vbar_i inscribed in the flat input set.
struct InscribedBox {
  Eigen::Vector3d vbar = Eigen::Vector3d::Zero();
};

bool in_u(const PhysicalInput& u, const VcParams& p, double tol = 1e-9);

// Translational acceleration produced by (T, phi, theta) at yaw psi.
Eigen::Vector3d plant_accel(const PhysicalInput& u, double psi, double g);

// Inverse transform: the flat input v is the commanded acceleration, mapped to
// thrust and attitude. Zero total thrust leaves the attitude undefined; both
// angles are returned as 0 and *singular_hover is set. v3 < -g has no
// preimage and throws "outside_flat_domain".
PhysicalInput flat_to_physical(const Eigen::Vector3d& v, double psi, double g,
                               bool* singular_hover = nullptr);

// Membership in the exact (non-convex boundary) flat input set:
// thrust sphere, attitude cone, and the v3 >= -g half-space.
bool vc_contains(const Eigen::Vector3d& v, const VcParams& p, double tol = 1e-9);

// Generators of the polytopic inner approximation: cone apex, the ring where
// sphere and cone meet, and spherical-cap rings at l2 radii and l1 azimuths.
// Duplicates (wrapped azimuth, r = 0 column) are removed.
std::vector<Eigen::VectorXd> vc_generators(const VcParams& p, int l1, int l2);

// Convex hull of vc_generators, a polytope inscribed in the exact set.
HPolytope build_vc_polytope(const VcParams& p, int l1, int l2);

// Largest-volume box |v_i| <= vbar_i inscribed in the exact set, in closed
// form from the KKT system of the corner-containment program. Which
// constraint pins the corners decides the branch: the thrust sphere, or the
// attitude cone together with the v3 floor.
InscribedBox max_inscribed_box(const VcParams& p);

// Shrink a nominal box by the largest beta in (0,1] keeping all corners of
// beta*nominal inside delta_vc. Closed form: beta = min_i h_i / sum_j |H_ij|
// vbar_j. Used for tracking, where the reference consumes part of the input
// set. Throws "tracking_box_empty" when delta_vc has lost the origin.
InscribedBox scaled_tracking_box(const HPolytope& delta_vc, const InscribedBox& nominal);

}  // namespace flatmpc
