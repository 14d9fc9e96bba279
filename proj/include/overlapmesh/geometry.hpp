#pragma once

#include "overlapmesh/types.hpp"

#include <array>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace olm {

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  bool valid() const { return (min.array() <= max.array()).all(); }
  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void expand(const Aabb& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  /// Closed-box overlap test.
  bool intersects(const Aabb& b) const {
    return (min.array() <= b.max.array()).all() && (b.min.array() <= max.array()).all();
  }
  bool contains(const Aabb& b) const {
    return (min.array() <= b.min.array()).all() && (b.max.array() <= max.array()).all();
  }
  bool contains(const Vec3& p) const {
    return (min.array() <= p.array()).all() && (p.array() <= max.array()).all();
  }
  double volume() const { return valid() ? (max - min).prod() : 0.0; }
  Vec3 center() const { return 0.5 * (min + max); }
  double diameter() const { return valid() ? (max - min).norm() : 0.0; }
};

Aabb bbox_of(std::span<const Vec3> points);
/// Grows every side by `eps`.
Aabb enlarge(const Aabb& box, double eps);

/// The plane {x : normal . x = offset}; `normal` has unit length.
struct Plane {
  Vec3 normal;
  double offset = 0.0;

  double signed_distance(const Vec3& x) const { return normal.dot(x) - offset; }
  Plane flipped() const { return {-normal, -offset}; }
};

/// Planar polygon with a counterclockwise vertex loop seen from `normal`.
/// An empty vertex list represents the empty set.
struct PlanarPolygon {
  std::vector<Vec3> vertices;
  Vec3 normal = Vec3::Zero();

  bool empty() const { return vertices.size() < 3; }
};

/// Convex polyhedron in boundary representation: faces carry outward normals.
/// No faces means the empty set.
struct ConvexPolyhedron {
  std::vector<PlanarPolygon> faces;

  bool empty() const { return faces.empty(); }
  static ConvexPolyhedron from_tet(const TetPoints& tet);
  static ConvexPolyhedron box(const Vec3& lo, const Vec3& hi);
};

/// Outward face planes of a tetrahedron: plane i contains the face opposite
/// vertex i. A point is inside iff signed_distance <= 0 for all four.
std::array<Plane, 4> tet_halfspaces(const TetPoints& tet);

/// Intersection of `poly` with {x : plane.normal . x <= plane.offset}.
ConvexPolyhedron clip_polyhedron_halfspace(const ConvexPolyhedron& poly, const Plane& plane);

/// A clipped sequentially by the four half-spaces of B.
ConvexPolyhedron tet_tet_intersection(const TetPoints& a, const TetPoints& b);
/// Same with the half-spaces of B precomputed.
ConvexPolyhedron tet_tet_intersection(const TetPoints& a, const std::array<Plane, 4>& planes_b);

/// Intersection of a polygon with a half-space (Sutherland-Hodgman), same
/// normal as the input. `scale` sets the welding tolerance eps_geom * scale.
PlanarPolygon clip_polygon_halfspace(const PlanarPolygon& poly, const Plane& plane, double scale);

/// Convex polygon tri ∩ tet; normal inherited from the triangle winding.
PlanarPolygon clip_triangle_tet(const TriPoints& tri, const TetPoints& tet);

/// Separating-axis test for a closed tetrahedron and a closed triangle.
/// Contacts within eps_geom * scale count as intersections.
bool tet_triangle_intersects(const TetPoints& tet, const TriPoints& tri);

bool point_in_tet(const TetPoints& tet, const Vec3& x, double tol = 0.0);

struct RayHit {
  double t = 0.0;
  /// Hit is within eps_geom of an edge, the ray is nearly parallel to the
  /// triangle, or the origin lies on the triangle.
  bool degenerate = false;
};

/// Smallest t >= 0 with origin + t * direction inside the closed triangle.
std::optional<RayHit> ray_triangle_intersect(const Vec3& origin, const Vec3& direction,
                                             const TriPoints& tri);

/// Vector area (Newell): |result| is the area, direction the loop normal.
Vec3 polygon_vector_area(std::span<const Vec3> loop);

Aabb bbox_of(const ConvexPolyhedron& poly);

/// Edge-pairing audit. Vertices are welded within eps_geom * diameter; every
/// directed edge must be matched by exactly one reversed edge of another face.
/// Returns the number of unmatched directed edges (0 for a closed polyhedron).
std::size_t count_unpaired_edges(const ConvexPolyhedron& poly);

void write_off(std::ostream& out, const ConvexPolyhedron& poly);
void write_off(std::ostream& out, const PlanarPolygon& poly);
/// Polygon soup, one OFF face per polygon.
void write_off(std::ostream& out, std::span<const PlanarPolygon> polys);

}  // namespace olm
