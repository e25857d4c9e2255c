#include "flatmpc/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "flatmpc/lp.hpp"

namespace flatmpc {

namespace {

constexpr double kBig = 1e7;  // artificial bounding box for polygon clipping

// Drop rows whose normals coincide within 1e-9, keeping the tightest offset.
HPolytope dedupe_rows(const HPolytope& p) {
  std::vector<int> keep;
  std::vector<double> off;
  for (int i = 0; i < p.rows(); ++i) {
    bool merged = false;
    for (size_t k = 0; k < keep.size(); ++k) {
      if ((p.H.row(i) - p.H.row(keep[k])).norm() <= 1e-9) {
        off[k] = std::min(off[k], p.h(i));
        merged = true;
        break;
      }
    }
    if (!merged) {
      keep.push_back(i);
      off.push_back(p.h(i));
    }
  }
  HPolytope out;
  out.H.resize(static_cast<int>(keep.size()), p.dim());
  out.h.resize(static_cast<int>(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k) {
    out.H.row(static_cast<int>(k)) = p.H.row(keep[k]);
    out.h(static_cast<int>(k)) = off[k];
  }
  return out;
}

// Sutherland-Hodgman clip of a convex polygon against n.x <= d.
std::vector<Eigen::Vector2d> clip_halfplane(const std::vector<Eigen::Vector2d>& poly,
                                            const Eigen::Vector2d& n, double d) {
  std::vector<Eigen::Vector2d> out;
  const int m = static_cast<int>(poly.size());
  if (m == 0) return out;
  const double eps = 1e-12 * (1.0 + std::abs(d));
  for (int i = 0; i < m; ++i) {
    const Eigen::Vector2d& cur = poly[i];
    const Eigen::Vector2d& nxt = poly[(i + 1) % m];
    const double sc = d - n.dot(cur);  // >= 0 means inside
    const double sn = d - n.dot(nxt);
    if (sc >= -eps) out.push_back(cur);
    if ((sc > eps && sn < -eps) || (sc < -eps && sn > eps)) {
      const double t = sc / (sc - sn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

std::vector<Eigen::Vector2d> dedupe_poly(const std::vector<Eigen::Vector2d>& poly) {
  std::vector<Eigen::Vector2d> out;
  const int m = static_cast<int>(poly.size());
  for (int i = 0; i < m; ++i) {
    const Eigen::Vector2d& prev = out.empty() ? poly[m - 1] : out.back();
    const double tol = 1e-11 * (1.0 + std::max(poly[i].norm(), prev.norm()));
    if (out.empty() || (poly[i] - out.back()).norm() > tol) out.push_back(poly[i]);
  }
  while (out.size() >= 2 && (out.front() - out.back()).norm() <=
                                1e-11 * (1.0 + out.front().norm())) {
    out.pop_back();
  }
  return out;
}

LpResult max_direction(const HPolytope& p, const Eigen::VectorXd& dir) {
  LpResult r = solve_lp(-dir, p.H, p.h);
  r.value = -r.value;  // report the max, not the negated min
  return r;
}

// One LP per row: row kept iff its max over the other rows exceeds h + 1e-9.
HPolytope remove_redundant_lp(const HPolytope& in) {
  auto [c, rad] = chebyshev(in);
  (void)c;
  if (rad < -1e-9) throw Error("empty_polytope", "polytope has no points");
  std::vector<char> kept(static_cast<size_t>(in.rows()), 1);
  for (int i = 0; i < in.rows(); ++i) {
    int m_others = 0;
    for (int j = 0; j < in.rows(); ++j)
      if (j != i && kept[static_cast<size_t>(j)]) ++m_others;
    Eigen::MatrixXd G(m_others, in.dim());
    Eigen::VectorXd w(m_others);
    int r = 0;
    for (int j = 0; j < in.rows(); ++j) {
      if (j == i || !kept[static_cast<size_t>(j)]) continue;
      G.row(r) = in.H.row(j);
      w(r) = in.h(j);
      ++r;
    }
    LpResult res = max_direction({G, w}, in.H.row(i).transpose());
    const bool needed =
        res.status == LpStatus::unbounded ||
        (res.status == LpStatus::optimal && res.value > in.h(i) + 1e-9);
    kept[static_cast<size_t>(i)] = needed ? 1 : 0;
  }
  int m_out = 0;
  for (char k : kept) m_out += k;
  HPolytope out;
  out.H.resize(m_out, in.dim());
  out.h.resize(m_out);
  int r = 0;
  for (int i = 0; i < in.rows(); ++i) {
    if (!kept[static_cast<size_t>(i)]) continue;
    out.H.row(r) = in.H.row(i);
    out.h(r) = in.h(i);
    ++r;
  }
  return out;
}

struct Face {
  int a, b, c;
  Eigen::Vector3d n;
  double d;
  bool alive = true;
};

// Incremental convex hull in 3D. Points must span the full space; coplanar
// clusters are fine, the resulting coplanar triangles merge into one row.
std::vector<Face> hull_faces_3d(const std::vector<Eigen::Vector3d>& pts, double scale) {
  const int n = static_cast<int>(pts.size());
  const double degen = 1e-9 * scale;

  int i0 = 0;
  for (int i = 1; i < n; ++i) {
    const Eigen::Vector3d &a = pts[i], &b = pts[i0];
    if (a.x() < b.x() || (a.x() == b.x() && (a.y() < b.y() || (a.y() == b.y() && a.z() < b.z()))))
      i0 = i;
  }
  int i1 = -1;
  double best = degen;
  for (int i = 0; i < n; ++i) {
    const double d = (pts[i] - pts[i0]).norm();
    if (d > best) best = d, i1 = i;
  }
  if (i1 < 0) throw Error("hull_degenerate", "3d hull input collapses to a point");
  const Eigen::Vector3d u = (pts[i1] - pts[i0]).normalized();
  int i2 = -1;
  best = degen;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d r = pts[i] - pts[i0];
    const double d = (r - r.dot(u) * u).norm();
    if (d > best) best = d, i2 = i;
  }
  if (i2 < 0) throw Error("hull_degenerate", "3d hull input is collinear");
  const Eigen::Vector3d n012 = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
  int i3 = -1;
  best = degen;
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(n012.dot(pts[i] - pts[i0]));
    if (d > best) best = d, i3 = i;
  }
  if (i3 < 0) throw Error("hull_degenerate", "3d hull input is coplanar");

  std::vector<Face> faces;
  auto make_face = [&pts, scale](int a, int b, int c) {
    Face f;
    f.a = a;
    f.b = b;
    f.c = c;
    const Eigen::Vector3d cr = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
    if (cr.norm() <= 1e-14 * scale * scale)
      throw Error("hull_degenerate", "degenerate face in 3d hull");
    f.n = cr.normalized();
    f.d = f.n.dot(pts[a]);
    return f;
  };
  auto add_oriented = [&](int a, int b, int c, int opposite) {
    Face f = make_face(a, b, c);
    if (f.n.dot(pts[opposite]) > f.d) {
      std::swap(f.b, f.c);
      f.n = -f.n;
      f.d = f.n.dot(pts[f.a]);
    }
    faces.push_back(f);
  };
  add_oriented(i0, i1, i2, i3);
  add_oriented(i0, i1, i3, i2);
  add_oriented(i0, i2, i3, i1);
  add_oriented(i1, i2, i3, i0);

  const double eps_vis = 1e-10 * std::max(1.0, scale);
  for (int p = 0; p < n; ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    std::vector<int> visible;
    for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
      if (!faces[f].alive) continue;
      if (faces[f].n.dot(pts[p]) - faces[f].d > eps_vis) visible.push_back(f);
    }
    if (visible.empty()) continue;  // inside or on the current hull

    std::map<std::pair<int, int>, int> edge_count;
    for (int f : visible) {
      const Face& fc = faces[f];
      ++edge_count[{fc.a, fc.b}];
      ++edge_count[{fc.b, fc.c}];
      ++edge_count[{fc.c, fc.a}];
    }
    std::vector<std::pair<int, int>> horizon;
    for (const auto& [e, cnt] : edge_count) {
      (void)cnt;
      if (edge_count.find({e.second, e.first}) == edge_count.end()) horizon.push_back(e);
    }
    for (int f : visible) faces[f].alive = false;
    for (const auto& [ea, eb] : horizon) {
      Face f = make_face(ea, eb, p);
      faces.push_back(f);
    }
  }
  faces.erase(std::remove_if(faces.begin(), faces.end(),
                             [](const Face& f) { return !f.alive; }),
              faces.end());
  return faces;
}

}  // namespace

HPolytope HPolytope::box(const Eigen::VectorXd& half) {
  const int d = static_cast<int>(half.size());
  HPolytope p;
  p.H = Eigen::MatrixXd::Zero(2 * d, d);
  p.h.resize(2 * d);
  for (int i = 0; i < d; ++i) {
    if (!(half(i) > 0.0)) throw Error("empty_polytope", "box halfwidth must be positive");
    p.H(2 * i, i) = 1.0;
    p.h(2 * i) = half(i);
    p.H(2 * i + 1, i) = -1.0;
    p.h(2 * i + 1) = half(i);
  }
  return p;
}

HPolytope HPolytope::product(const HPolytope& a, const HPolytope& b) {
  HPolytope p;
  p.H = Eigen::MatrixXd::Zero(a.rows() + b.rows(), a.dim() + b.dim());
  p.H.topLeftCorner(a.rows(), a.dim()) = a.H;
  p.H.bottomRightCorner(b.rows(), b.dim()) = b.H;
  p.h.resize(a.rows() + b.rows());
  p.h << a.h, b.h;
  return p;
}

HPolytope normalize_rows(const HPolytope& p) {
  std::vector<int> keep;
  for (int i = 0; i < p.rows(); ++i) {
    const double nrm = p.H.row(i).norm();
    if (nrm > 1e-12) {
      keep.push_back(i);
    } else if (p.h(i) < -1e-9) {
      throw Error("empty_polytope", "zero row with negative offset");
    }
  }
  HPolytope out;
  out.H.resize(static_cast<int>(keep.size()), p.dim());
  out.h.resize(static_cast<int>(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k) {
    const double nrm = p.H.row(keep[k]).norm();
    out.H.row(static_cast<int>(k)) = p.H.row(keep[k]) / nrm;
    out.h(static_cast<int>(k)) = p.h(keep[k]) / nrm;
  }
  return out;
}

Canon2D canonicalize_2d(const Eigen::MatrixXd& H, const Eigen::VectorXd& h) {
  if (H.cols() != 2) throw Error("unsupported_dimension", "canonicalize_2d needs d=2");
  Canon2D out;
  HPolytope p = dedupe_rows(normalize_rows({H, h}));

  std::vector<Eigen::Vector2d> poly = {
      {-kBig, -kBig}, {kBig, -kBig}, {kBig, kBig}, {-kBig, kBig}};
  for (int i = 0; i < p.rows(); ++i) {
    poly = clip_halfplane(poly, p.H.row(i).transpose(), p.h(i));
    if (poly.size() < 3) break;
  }
  poly = dedupe_poly(poly);
  if (poly.size() < 3) {
    out.empty = true;
    return out;
  }

  // Map every polygon edge back to the input row supporting it. An edge no
  // row supports sits on the artificial bounding box, i.e. the set is
  // unbounded in that direction.
  const int ne = static_cast<int>(poly.size());
  std::vector<int> edge_row(static_cast<size_t>(ne), -1);
  std::vector<char> used(static_cast<size_t>(p.rows()), 0);
  for (int e = 0; e < ne; ++e) {
    const Eigen::Vector2d& v0 = poly[static_cast<size_t>(e)];
    const Eigen::Vector2d& v1 = poly[static_cast<size_t>((e + 1) % ne)];
    for (int i = 0; i < p.rows(); ++i) {
      if (used[static_cast<size_t>(i)]) continue;
      const double tol = 1e-8 * (1.0 + std::abs(p.h(i)));
      if (p.H.row(i).dot(v0) >= p.h(i) - tol && p.H.row(i).dot(v1) >= p.h(i) - tol) {
        edge_row[static_cast<size_t>(e)] = i;
        used[static_cast<size_t>(i)] = 1;
        break;
      }
    }
    if (edge_row[static_cast<size_t>(e)] < 0) out.bounded = false;
  }
  if (!out.bounded) {
    out.empty = false;
    out.verts.assign(poly.begin(), poly.end());
    return out;
  }

  out.empty = false;
  out.verts.assign(poly.begin(), poly.end());
  out.poly.H.resize(ne, 2);
  out.poly.h.resize(ne);
  for (int e = 0; e < ne; ++e) {
    out.poly.H.row(e) = p.H.row(edge_row[static_cast<size_t>(e)]);
    out.poly.h(e) = p.h(edge_row[static_cast<size_t>(e)]);
  }

  auto [center, radius] = chebyshev(out.poly);
  out.cheb_center = center;
  out.cheb_radius = radius;
  return out;
}

double polygon_area(const std::vector<Eigen::Vector2d>& verts) {
  const int m = static_cast<int>(verts.size());
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const Eigen::Vector2d& a = verts[static_cast<size_t>(i)];
    const Eigen::Vector2d& b = verts[static_cast<size_t>((i + 1) % m)];
    s += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(s);
}

std::pair<Eigen::VectorXd, double> chebyshev(const HPolytope& p_in) {
  const int d = p_in.dim();
  if (p_in.rows() == 0) {
    return {Eigen::VectorXd::Zero(d), std::numeric_limits<double>::infinity()};
  }
  HPolytope p = normalize_rows(p_in);
  if (p.rows() == 0) return {Eigen::VectorXd::Zero(d), std::numeric_limits<double>::infinity()};

  Eigen::MatrixXd G(p.rows(), d + 1);
  G.leftCols(d) = p.H;
  G.col(d).setOnes();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d + 1);
  c(d) = -1.0;  // maximize the inscribed radius
  LpResult r = solve_lp(c, G, p.h);
  if (r.status == LpStatus::unbounded) {
    return {Eigen::VectorXd::Zero(d), std::numeric_limits<double>::infinity()};
  }
  if (r.status != LpStatus::optimal) throw Error("lp_failed", "chebyshev LP failed");
  return {r.x.head(d), r.x(d)};
}

bool is_empty(const HPolytope& p) {
  if (p.rows() == 0) return false;
  try {
    auto [c, rad] = chebyshev(p);
    (void)c;
    return rad < -1e-9;
  } catch (const Error& e) {
    if (e.code() == "empty_polytope") return true;
    throw;
  }
}

HPolytope remove_redundant(const HPolytope& p_in) {
  HPolytope p = dedupe_rows(normalize_rows(p_in));
  if (p.dim() == 2) {
    Canon2D canon = canonicalize_2d(p.H, p.h);
    if (!canon.empty && canon.bounded) return canon.poly;
    if (canon.empty) {
      // Distinguish truly empty from lower-dimensional before giving up.
      auto [c, rad] = chebyshev(p);
      (void)c;
      if (rad < -1e-9) throw Error("empty_polytope", "polytope has no points");
    }
  }
  return remove_redundant_lp(p);
}

HPolytope hull(const std::vector<Eigen::VectorXd>& points) {
  if (points.empty()) throw Error("hull_degenerate", "no input points");
  const int d = static_cast<int>(points[0].size());
  for (const auto& q : points)
    if (static_cast<int>(q.size()) != d)
      throw Error("hull_degenerate", "mixed point dimensions");

  double scale = 1.0;
  for (const auto& q : points) scale = std::max(scale, q.lpNorm<Eigen::Infinity>());

  // dedupe
  std::vector<Eigen::VectorXd> pts;
  for (const auto& q : points) {
    bool dup = false;
    for (const auto& r : pts)
      if ((q - r).norm() <= 1e-12 * scale) {
        dup = true;
        break;
      }
    if (!dup) pts.push_back(q);
  }

  if (d == 2) {
    if (pts.size() < 3) throw Error("hull_degenerate", "need 3 points spanning 2d");
    std::sort(pts.begin(), pts.end(), [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
      return a(0) < b(0) || (a(0) == b(0) && a(1) < b(1));
    });
    const double ctol = 1e-12 * scale * scale;
    auto cross = [](const Eigen::VectorXd& o, const Eigen::VectorXd& a,
                    const Eigen::VectorXd& b) {
      return (a(0) - o(0)) * (b(1) - o(1)) - (a(1) - o(1)) * (b(0) - o(0));
    };
    std::vector<Eigen::VectorXd> ch(2 * pts.size());
    int k = 0;
    for (const auto& q : pts) {
      while (k >= 2 && cross(ch[static_cast<size_t>(k - 2)], ch[static_cast<size_t>(k - 1)], q) <= ctol) --k;
      ch[static_cast<size_t>(k++)] = q;
    }
    const int lower = k + 1;
    for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
      while (k >= lower && cross(ch[static_cast<size_t>(k - 2)], ch[static_cast<size_t>(k - 1)], *it) <= ctol) --k;
      ch[static_cast<size_t>(k++)] = *it;
    }
    ch.resize(static_cast<size_t>(k - 1));  // CCW, last point repeats the first
    if (ch.size() < 3) throw Error("hull_degenerate", "2d hull input is collinear");

    HPolytope out;
    const int m = static_cast<int>(ch.size());
    out.H.resize(m, 2);
    out.h.resize(m);
    for (int i = 0; i < m; ++i) {
      const Eigen::Vector2d a = ch[static_cast<size_t>(i)].head<2>();
      const Eigen::Vector2d b = ch[static_cast<size_t>((i + 1) % m)].head<2>();
      Eigen::Vector2d n(b.y() - a.y(), a.x() - b.x());  // outward for CCW
      const double nrm = n.norm();
      if (nrm <= 1e-14 * scale) throw Error("hull_degenerate", "zero-length hull edge");
      n /= nrm;
      out.H.row(i) = n.transpose();
      out.h(i) = n.dot(a);
    }
    return out;
  }

  if (d == 3) {
    std::vector<Eigen::Vector3d> pts3;
    pts3.reserve(pts.size());
    for (const auto& q : pts) pts3.emplace_back(q(0), q(1), q(2));
    std::vector<Face> faces = hull_faces_3d(pts3, scale);

    // Merge coplanar triangles into single rows.
    HPolytope out;
    std::vector<Eigen::Vector3d> normals;
    std::vector<double> offs;
    for (const Face& f : faces) {
      bool merged = false;
      for (size_t k = 0; k < normals.size(); ++k) {
        if ((f.n - normals[k]).norm() <= 1e-7 &&
            std::abs(f.d - offs[k]) <= 1e-7 * (1.0 + std::abs(offs[k]))) {
          offs[k] = std::max(offs[k], f.d);
          merged = true;
          break;
        }
      }
      if (!merged) {
        normals.push_back(f.n);
        offs.push_back(f.d);
      }
    }
    out.H.resize(static_cast<int>(normals.size()), 3);
    out.h.resize(static_cast<int>(normals.size()));
    for (size_t k = 0; k < normals.size(); ++k) {
      out.H.row(static_cast<int>(k)) = normals[k].transpose();
      out.h(static_cast<int>(k)) = offs[k];
    }
    // Absorb facet-plane roundoff so every input point verifies Hx <= h + 1e-9.
    for (int i = 0; i < out.rows(); ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (const auto& q : pts3) mx = std::max(mx, out.H.row(i).head<3>().dot(q));
      if (mx > out.h(i) && mx <= out.h(i) + 1e-9) out.h(i) = mx;
    }
    return out;
  }

  throw Error("unsupported_dimension", "hull supports d in {2,3}");
}

VPolytope vertices(const HPolytope& p_in) {
  const int d = p_in.dim();
  VPolytope out;

  if (d == 2) {
    Canon2D canon = canonicalize_2d(p_in.H, p_in.h);
    if (canon.empty) return out;
    if (!canon.bounded) throw Error("unbounded_polytope", "vertex enumeration needs a bounded set");
    for (const auto& v : canon.verts) out.vertices.push_back(v);
    return out;
  }

  if (d == 3) {
    HPolytope p = dedupe_rows(normalize_rows(p_in));
    for (int k = 0; k < 3; ++k) {
      for (double sgn : {1.0, -1.0}) {
        Eigen::VectorXd dir = Eigen::VectorXd::Zero(3);
        dir(k) = sgn;
        LpResult r = max_direction(p, dir);
        if (r.status == LpStatus::unbounded)
          throw Error("unbounded_polytope", "vertex enumeration needs a bounded set");
        if (r.status == LpStatus::infeasible) return out;
      }
    }
    const int m = p.rows();
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        for (int k = j + 1; k < m; ++k) {
          Eigen::Matrix3d A;
          A.row(0) = p.H.row(i);
          A.row(1) = p.H.row(j);
          A.row(2) = p.H.row(k);
          const double det = A.row(0).dot(Eigen::Vector3d(A.row(1)).cross(Eigen::Vector3d(A.row(2))));
          if (std::abs(det) <= 1e-10) continue;
          const Eigen::Vector3d b(p.h(i), p.h(j), p.h(k));
          const Eigen::Vector3d x = A.partialPivLu().solve(b);
          const double tol = 1e-8 * (1.0 + x.lpNorm<Eigen::Infinity>());
          if (!p.contains(x, tol)) continue;
          bool dup = false;
          for (const auto& v : out.vertices)
            if ((v - x).norm() <= 1e-9 * (1.0 + x.norm())) {
              dup = true;
              break;
            }
          if (!dup) out.vertices.push_back(x);
        }
      }
    }
    return out;
  }

  throw Error("unsupported_dimension", "vertex enumeration supports d in {2,3}");
}

HPolytope pontryagin_diff(const HPolytope& p, const VPolytope& q) {
  if (q.vertices.empty()) return p;
  HPolytope out = p;
  for (int i = 0; i < p.rows(); ++i) {
    double support = -std::numeric_limits<double>::infinity();
    for (const auto& v : q.vertices) support = std::max(support, p.H.row(i).dot(v));
    out.h(i) = p.h(i) - support;
  }
  return out;
}

HPolytope mpi_set(const Eigen::MatrixXd& A_cl, const HPolytope& X,
                  const Eigen::MatrixXd& K, const HPolytope& v_bound) {
  const int d = X.dim();
  if (A_cl.rows() != d || A_cl.cols() != d)
    throw Error("unsupported_dimension", "closed-loop matrix does not match the state set");

  Eigen::MatrixXd H0 = X.H;
  Eigen::VectorXd h0 = X.h;
  if (v_bound.rows() > 0) {
    Eigen::MatrixXd Hv = -v_bound.H * K;  // v = -K xi inside the input set
    H0.conservativeResize(H0.rows() + Hv.rows(), Eigen::NoChange);
    H0.bottomRows(Hv.rows()) = Hv;
    h0.conservativeResize(h0.size() + v_bound.h.size());
    h0.tail(v_bound.h.size()) = v_bound.h;
  }

  HPolytope omega = remove_redundant({H0, h0});
  for (int iter = 0; iter < 500; ++iter) {
    VPolytope V = vertices(omega);
    if (V.vertices.empty()) throw Error("empty_polytope", "invariant set iteration emptied out");
    bool invariant = true;
    for (const auto& v : V.vertices) {
      if (!omega.contains(A_cl * v, 1e-9)) {
        invariant = false;
        break;
      }
    }
    if (invariant) return omega;

    Eigen::MatrixXd Hn(2 * omega.rows(), d);
    Eigen::VectorXd hn(2 * omega.rows());
    Hn.topRows(omega.rows()) = omega.H;
    Hn.bottomRows(omega.rows()) = omega.H * A_cl;
    hn.head(omega.rows()) = omega.h;
    hn.tail(omega.rows()) = omega.h;
    HPolytope next = remove_redundant({Hn, hn});

    // Fixed point: every pre-image row came back redundant, so omega is
    // invariant within the redundancy tolerance even when a vertex image
    // grazes the boundary just past the point test above.
    bool fixed = next.rows() == omega.rows();
    if (fixed) {
      VPolytope Vn = vertices(next);
      fixed = Vn.vertices.size() == V.vertices.size();
      if (fixed) {
        for (const auto& vn : Vn.vertices) {
          double best = std::numeric_limits<double>::infinity();
          for (const auto& v : V.vertices) best = std::min(best, (vn - v).norm());
          if (best > 1e-7 * (1.0 + vn.norm())) {
            fixed = false;
            break;
          }
        }
      }
    }
    if (fixed) return omega;
    omega = next;
  }
  throw Error("mpi_not_converged", "invariant set iteration hit the cap");
}

}  // namespace flatmpc
