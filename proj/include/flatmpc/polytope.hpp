#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "flatmpc/types.hpp"

namespace flatmpc {

// {x : Hx <= h}. Canonical form has unit-norm rows and no redundant rows.
struct HPolytope {
  Eigen::MatrixXd H;  // m x d
  Eigen::VectorXd h;  // m

  int dim() const { return static_cast<int>(H.cols()); }
  int rows() const { return static_cast<int>(H.rows()); }

  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const {
    for (int i = 0; i < rows(); ++i)
      if (H.row(i).dot(x) > h(i) + tol) return false;
    return true;
  }

  // axis-aligned box |x_i| <= half(i)
  static HPolytope box(const Eigen::VectorXd& half);
  // Cartesian product (block-diagonal row stacking)
  static HPolytope product(const HPolytope& a, const HPolytope& b);
};

struct VPolytope {
  std::vector<Eigen::VectorXd> vertices;
};

// Scale rows to unit norm (1e-12 threshold). Zero rows with h >= -1e-9 are
// dropped as trivial; a zero row with negative offset throws "empty_polytope".
HPolytope normalize_rows(const HPolytope& p);

// Minimal H-representation of conv(points), d in {2,3}. Affinely dependent
// input throws "hull_degenerate".
HPolytope hull(const std::vector<Eigen::VectorXd>& points);

// Exact vertex set of a bounded full-dimensional polytope, d in {2,3}.
// Unbounded input throws "unbounded_polytope".
VPolytope vertices(const HPolytope& p);

// Irredundant equivalent description. A row is kept iff maximizing it over
// the remaining rows exceeds its offset by more than 1e-9. Detected empty
// sets throw "empty_polytope". 2D goes through polygon clipping, other
// dimensions through one LP per row.
HPolytope remove_redundant(const HPolytope& p);

// p (-) conv(q): offsets shrink by the support function of q. The returned
// set is not canonicalized and may be empty; test with is_empty().
HPolytope pontryagin_diff(const HPolytope& p, const VPolytope& q);

// Maximal positive invariant subset of X ∩ {xi : -K xi ∈ v_bound} under
// x+ = A_cl x, by the pre-set iteration run to set equality (vertex test).
// Pass an empty v_bound (0 rows) for no input constraint. Iteration cap 500,
// exceeded -> "mpi_not_converged".
HPolytope mpi_set(const Eigen::MatrixXd& A_cl, const HPolytope& X,
                  const Eigen::MatrixXd& K, const HPolytope& v_bound);

// Chebyshev center and radius. radius < 0 means empty; +inf flags an
// unbounded set that admits arbitrarily large balls.
std::pair<Eigen::VectorXd, double> chebyshev(const HPolytope& p);

bool is_empty(const HPolytope& p);

// Canonical 2D description plus its vertex polygon (CCW), used heavily by the
// critical-region machinery: emptiness, facet midpoints and Chebyshev data in
// one pass.
struct Canon2D {
  HPolytope poly;                        // canonical rows, one per polygon edge
  std::vector<Eigen::Vector2d> verts;    // CCW, verts[i] -> verts[i+1] lies on row i
  Eigen::Vector2d cheb_center = Eigen::Vector2d::Zero();
  double cheb_radius = -1.0;
  bool empty = true;
  bool bounded = true;
};
Canon2D canonicalize_2d(const Eigen::MatrixXd& H, const Eigen::VectorXd& h);

double polygon_area(const std::vector<Eigen::Vector2d>& verts);

}  // namespace flatmpc
