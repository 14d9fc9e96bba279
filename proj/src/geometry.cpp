#include "overlapmesh/geometry.hpp"

#include "overlapmesh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

namespace olm {

Aabb bbox_of(std::span<const Vec3> points) {
  Aabb b;
  for (const Vec3& p : points) b.expand(p);
  return b;
}

Aabb enlarge(const Aabb& box, double eps) {
  return {box.min - Vec3::Constant(eps), box.max + Vec3::Constant(eps)};
}

Aabb bbox_of(const ConvexPolyhedron& poly) {
  Aabb b;
  for (const auto& f : poly.faces)
    for (const Vec3& p : f.vertices) b.expand(p);
  return b;
}

Vec3 polygon_vector_area(std::span<const Vec3> loop) {
  Vec3 a = Vec3::Zero();
  if (loop.size() < 3) return a;
  const Vec3& o = loop[0];
  for (std::size_t i = 1; i + 1 < loop.size(); ++i) a += (loop[i] - o).cross(loop[i + 1] - o);
  return 0.5 * a;
}

namespace {

double tet_scale(const TetPoints& t) {
  double l = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) l = std::max(l, (t[i] - t[j]).norm());
  return l;
}

double tri_scale(const TriPoints& t) {
  return std::max({(t[0] - t[1]).norm(), (t[1] - t[2]).norm(), (t[2] - t[0]).norm()});
}

// Removes cyclically consecutive points closer than tol.
void weld_loop(std::vector<Vec3>& loop, double tol) {
  if (loop.empty()) return;
  std::vector<Vec3> out;
  out.reserve(loop.size());
  for (const Vec3& p : loop)
    if (out.empty() || (p - out.back()).norm() > tol) out.push_back(p);
  while (out.size() > 1 && (out.front() - out.back()).norm() <= tol) out.pop_back();
  loop = std::move(out);
}

// Sutherland-Hodgman against {d <= 0} with a tolerance band |d| <= tol treated
// as "on the plane". Crossing points are interpolated from the inside vertex,
// so two faces sharing an edge produce bitwise identical points. Points that
// end up on the plane are appended to `cut_points` when given.
std::vector<Vec3> clip_loop(const std::vector<Vec3>& loop, const Plane& plane, double tol,
                            std::vector<Vec3>* cut_points) {
  const std::size_t n = loop.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = plane.signed_distance(loop[i]);

  std::vector<Vec3> out;
  out.reserve(n + 2);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const double dc = d[i], dn = d[j];
    if (dc <= tol) {
      out.push_back(loop[i]);
      if (cut_points && dc >= -tol) cut_points->push_back(loop[i]);
    }
    if ((dc < -tol && dn > tol) || (dc > tol && dn < -tol)) {
      Vec3 p;
      if (dc < 0)
        p = loop[i] + (dc / (dc - dn)) * (loop[j] - loop[i]);
      else
        p = loop[j] + (dn / (dn - dc)) * (loop[i] - loop[j]);
      out.push_back(p);
      if (cut_points) cut_points->push_back(p);
    }
  }
  weld_loop(out, tol);
  return out;
}

// Orders coplanar points counterclockwise around `normal`, merging points
// closer than tol.
std::vector<Vec3> convex_loop(std::vector<Vec3> pts, const Vec3& normal, double tol) {
  std::vector<Vec3> uniq;
  for (const Vec3& p : pts) {
    bool dup = false;
    for (const Vec3& q : uniq)
      if ((p - q).norm() <= tol) {
        dup = true;
        break;
      }
    if (!dup) uniq.push_back(p);
  }
  if (uniq.size() < 3) return {};
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : uniq) c += p;
  c /= static_cast<double>(uniq.size());
  const Vec3 u = normal.unitOrthogonal();
  const Vec3 v = normal.cross(u);
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(uniq.size());
  for (std::size_t i = 0; i < uniq.size(); ++i) {
    const Vec3 r = uniq[i] - c;
    order.emplace_back(std::atan2(r.dot(v), r.dot(u)), i);
  }
  std::sort(order.begin(), order.end());
  std::vector<Vec3> loop;
  loop.reserve(uniq.size());
  for (const auto& [angle, i] : order) loop.push_back(uniq[i]);
  return loop;
}

double loop_diameter(const ConvexPolyhedron& poly) { return bbox_of(poly).diameter(); }

}  // namespace

ConvexPolyhedron ConvexPolyhedron::from_tet(const TetPoints& t) {
  ConvexPolyhedron p;
  const auto planes = tet_halfspaces(t);
  for (int i = 0; i < 4; ++i) {
    std::vector<Vec3> loop;
    for (int j = 0; j < 4; ++j)
      if (j != i) loop.push_back(t[j]);
    if (polygon_vector_area(loop).dot(planes[i].normal) < 0) std::swap(loop[1], loop[2]);
    p.faces.push_back({std::move(loop), planes[i].normal});
  }
  return p;
}

ConvexPolyhedron ConvexPolyhedron::box(const Vec3& lo, const Vec3& hi) {
  if (!(lo.array() < hi.array()).all()) throw InvalidArgument("ConvexPolyhedron::box: degenerate box");
  auto corner = [&](int i, int j, int k) {
    return Vec3(i ? hi[0] : lo[0], j ? hi[1] : lo[1], k ? hi[2] : lo[2]);
  };
  ConvexPolyhedron p;
  // Each loop is counterclockwise seen from outside.
  p.faces.push_back({{corner(0, 0, 0), corner(0, 0, 1), corner(0, 1, 1), corner(0, 1, 0)}, -Vec3::UnitX()});
  p.faces.push_back({{corner(1, 0, 0), corner(1, 1, 0), corner(1, 1, 1), corner(1, 0, 1)}, Vec3::UnitX()});
  p.faces.push_back({{corner(0, 0, 0), corner(1, 0, 0), corner(1, 0, 1), corner(0, 0, 1)}, -Vec3::UnitY()});
  p.faces.push_back({{corner(0, 1, 0), corner(0, 1, 1), corner(1, 1, 1), corner(1, 1, 0)}, Vec3::UnitY()});
  p.faces.push_back({{corner(0, 0, 0), corner(0, 1, 0), corner(1, 1, 0), corner(1, 0, 0)}, -Vec3::UnitZ()});
  p.faces.push_back({{corner(0, 0, 1), corner(1, 0, 1), corner(1, 1, 1), corner(0, 1, 1)}, Vec3::UnitZ()});
  return p;
}

std::array<Plane, 4> tet_halfspaces(const TetPoints& t) {
  const double l = tet_scale(t);
  const double v6 = (t[1] - t[0]).dot((t[2] - t[0]).cross(t[3] - t[0]));
  if (!(std::abs(v6) > 1e-14 * l * l * l)) throw DegenerateGeometry("tet_halfspaces: degenerate tetrahedron");
  std::array<Plane, 4> planes;
  for (int i = 0; i < 4; ++i) {
    const Vec3& a = t[(i + 1) % 4];
    const Vec3& b = t[(i + 2) % 4];
    const Vec3& c = t[(i + 3) % 4];
    Vec3 n = (b - a).cross(c - a).normalized();
    if (n.dot(t[i] - a) > 0) n = -n;
    planes[i] = {n, (n.dot(a) + n.dot(b) + n.dot(c)) / 3.0};
  }
  return planes;
}

namespace {

// In-place clip; leaves `poly` untouched when the plane does not cut it.
void clip_in_place(ConvexPolyhedron& poly, const Plane& plane) {
  if (poly.empty()) return;
  const double tol = eps_geom * loop_diameter(poly);

  bool any_in = false, any_out = false;
  for (const auto& f : poly.faces)
    for (const Vec3& p : f.vertices) {
      const double d = plane.signed_distance(p);
      any_in |= d < -tol;
      any_out |= d > tol;
    }
  if (!any_out) return;
  if (!any_in) {
    poly.faces.clear();
    return;
  }

  ConvexPolyhedron out;
  out.faces.reserve(poly.faces.size() + 1);
  std::vector<Vec3> cut_points;
  for (const auto& f : poly.faces) {
    auto loop = clip_loop(f.vertices, plane, tol, &cut_points);
    if (loop.size() < 3) continue;
    if (polygon_vector_area(loop).norm() <= tol * tol) continue;
    out.faces.push_back({std::move(loop), f.normal});
  }
  auto cap = convex_loop(std::move(cut_points), plane.normal, tol);
  if (cap.size() >= 3 && polygon_vector_area(cap).norm() > tol * tol)
    out.faces.push_back({std::move(cap), plane.normal});
  if (out.faces.size() < 4) out.faces.clear();
  poly = std::move(out);
}

}  // namespace

ConvexPolyhedron clip_polyhedron_halfspace(const ConvexPolyhedron& poly, const Plane& plane) {
  ConvexPolyhedron out = poly;
  clip_in_place(out, plane);
  return out;
}

ConvexPolyhedron tet_tet_intersection(const TetPoints& a, const TetPoints& b) {
  return tet_tet_intersection(a, tet_halfspaces(b));
}

ConvexPolyhedron tet_tet_intersection(const TetPoints& a, const std::array<Plane, 4>& planes_b) {
  ConvexPolyhedron p = ConvexPolyhedron::from_tet(a);
  for (const Plane& h : planes_b) {
    clip_in_place(p, h);
    if (p.empty()) break;
  }
  return p;
}

PlanarPolygon clip_polygon_halfspace(const PlanarPolygon& poly, const Plane& plane, double scale) {
  if (poly.empty()) return {};
  auto loop = clip_loop(poly.vertices, plane, eps_geom * scale, nullptr);
  if (loop.size() < 3) return {};
  return {std::move(loop), poly.normal};
}

PlanarPolygon clip_triangle_tet(const TriPoints& tri, const TetPoints& tet) {
  const Vec3 n = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
  if (!(n.norm() > 0)) throw DegenerateGeometry("clip_triangle_tet: degenerate triangle");
  const double scale = std::max(tri_scale(tri), tet_scale(tet));
  const double tol = eps_geom * scale;
  PlanarPolygon poly{{tri[0], tri[1], tri[2]}, n.normalized()};
  for (const Plane& h : tet_halfspaces(tet)) {
    poly = clip_polygon_halfspace(poly, h, scale);
    if (poly.empty()) return {};
  }
  if (polygon_vector_area(poly.vertices).norm() <= tol * scale) return {};
  return poly;
}

bool point_in_tet(const TetPoints& tet, const Vec3& x, double tol) {
  for (const Plane& h : tet_halfspaces(tet))
    if (h.signed_distance(x) > tol) return false;
  return true;
}

bool tet_triangle_intersects(const TetPoints& tet, const TriPoints& tri) {
  const double scale = std::max(tet_scale(tet), tri_scale(tri));
  const double tol = eps_geom * scale;
  const double tiny = 1e-24 * scale * scale;

  auto separated = [&](const Vec3& axis) {
    const double len2 = axis.squaredNorm();
    if (len2 <= tiny) return false;
    double a0 = std::numeric_limits<double>::infinity(), a1 = -a0;
    double b0 = a0, b1 = -a0;
    for (const Vec3& p : tet) {
      const double s = axis.dot(p);
      a0 = std::min(a0, s);
      a1 = std::max(a1, s);
    }
    for (const Vec3& p : tri) {
      const double s = axis.dot(p);
      b0 = std::min(b0, s);
      b1 = std::max(b1, s);
    }
    const double slack = tol * std::sqrt(len2);
    return a0 > b1 + slack || b0 > a1 + slack;
  };

  for (int axis = 0; axis < 3; ++axis)
    if (separated(Vec3::Unit(axis))) return false;

  static constexpr std::array<std::array<int, 3>, 4> faces = {{{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};
  for (const auto& f : faces)
    if (separated((tet[f[1]] - tet[f[0]]).cross(tet[f[2]] - tet[f[0]]))) return false;

  const std::array<Vec3, 3> tri_edges = {tri[1] - tri[0], tri[2] - tri[1], tri[0] - tri[2]};
  if (separated(tri_edges[0].cross(tri_edges[1]))) return false;

  static constexpr std::array<std::array<int, 2>, 6> edges = {{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  for (const auto& e : edges) {
    const Vec3 te = tet[e[1]] - tet[e[0]];
    for (const Vec3& fe : tri_edges)
      if (separated(te.cross(fe))) return false;
  }
  return true;
}

std::optional<RayHit> ray_triangle_intersect(const Vec3& origin, const Vec3& direction,
                                             const TriPoints& tri) {
  const Vec3 e1 = tri[1] - tri[0];
  const Vec3 e2 = tri[2] - tri[0];
  const double scale = tri_scale(tri);
  const double dir_len = direction.norm();
  const Vec3 p = direction.cross(e2);
  const double det = e1.dot(p);
  const Vec3 s = origin - tri[0];

  if (std::abs(det) <= eps_geom * e1.norm() * e2.norm() * dir_len) {
    // Nearly parallel: only report when the origin could graze the triangle.
    const Vec3 n = e1.cross(e2).normalized();
    if (std::abs(n.dot(s)) <= eps_geom * scale) return RayHit{0.0, true};
    return std::nullopt;
  }
  const double inv = 1.0 / det;
  const double u = s.dot(p) * inv;
  if (u < -eps_geom || u > 1.0 + eps_geom) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = direction.dot(q) * inv;
  if (v < -eps_geom || u + v > 1.0 + eps_geom) return std::nullopt;
  const double t = e2.dot(q) * inv;
  const double t_tol = eps_geom * scale / dir_len;
  if (t < -t_tol) return std::nullopt;

  RayHit hit{std::max(t, 0.0), false};
  hit.degenerate = u < eps_geom || v < eps_geom || u + v > 1.0 - eps_geom || t <= t_tol;
  return hit;
}

std::size_t count_unpaired_edges(const ConvexPolyhedron& poly) {
  if (poly.empty()) return 0;
  const double tol = eps_geom * loop_diameter(poly) * 10.0;
  std::vector<Vec3> verts;
  auto id_of = [&](const Vec3& p) {
    for (std::size_t i = 0; i < verts.size(); ++i)
      if ((verts[i] - p).norm() <= tol) return i;
    verts.push_back(p);
    return verts.size() - 1;
  };
  std::map<std::pair<std::size_t, std::size_t>, int> directed;
  for (const auto& f : poly.faces) {
    std::vector<std::size_t> ids;
    for (const Vec3& p : f.vertices) {
      const auto id = id_of(p);
      if (ids.empty() || ids.back() != id) ids.push_back(id);
    }
    while (ids.size() > 1 && ids.front() == ids.back()) ids.pop_back();
    for (std::size_t i = 0; i < ids.size(); ++i) ++directed[{ids[i], ids[(i + 1) % ids.size()]}];
  }
  std::size_t unpaired = 0;
  for (const auto& [edge, count] : directed) {
    const auto rev = directed.find({edge.second, edge.first});
    const int rc = rev == directed.end() ? 0 : rev->second;
    if (count != 1 || rc != 1) unpaired += static_cast<std::size_t>(count);
  }
  return unpaired;
}

void write_off(std::ostream& out, const ConvexPolyhedron& poly) {
  std::size_t nv = 0;
  for (const auto& f : poly.faces) nv += f.vertices.size();
  out << "OFF\n" << nv << ' ' << poly.faces.size() << " 0\n";
  for (const auto& f : poly.faces)
    for (const Vec3& p : f.vertices) out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
  std::size_t base = 0;
  for (const auto& f : poly.faces) {
    out << f.vertices.size();
    for (std::size_t i = 0; i < f.vertices.size(); ++i) out << ' ' << base + i;
    out << '\n';
    base += f.vertices.size();
  }
}

void write_off(std::ostream& out, const PlanarPolygon& poly) {
  out << "OFF\n" << poly.vertices.size() << ' ' << (poly.empty() ? 0 : 1) << " 0\n";
  for (const Vec3& p : poly.vertices) out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
  if (!poly.empty()) {
    out << poly.vertices.size();
    for (std::size_t i = 0; i < poly.vertices.size(); ++i) out << ' ' << i;
    out << '\n';
  }
}

void write_off(std::ostream& out, std::span<const PlanarPolygon> polys) {
  std::size_t nv = 0, nf = 0;
  for (const auto& f : polys)
    if (!f.empty()) {
      nv += f.vertices.size();
      ++nf;
    }
  out << "OFF\n" << nv << ' ' << nf << " 0\n";
  for (const auto& f : polys)
    if (!f.empty())
      for (const Vec3& p : f.vertices) out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
  std::size_t base = 0;
  for (const auto& f : polys) {
    if (f.empty()) continue;
    out << f.vertices.size();
    for (std::size_t i = 0; i < f.vertices.size(); ++i) out << ' ' << base + i;
    out << '\n';
    base += f.vertices.size();
  }
}

}  // namespace olm
