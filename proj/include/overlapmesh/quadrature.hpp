#pragma once

#include "overlapmesh/geometry.hpp"
#include "overlapmesh/types.hpp"

#include <array>
#include <functional>
#include <map>
#include <vector>

namespace olm {

/// Exponents (a, b, c) of the monomial x^a y^b z^c.
using MultiIndex = std::array<int, 3>;

inline int order(const MultiIndex& a) { return a[0] + a[1] + a[2]; }

/// All multi-indices with order <= degree, graded then lexicographic.
std::vector<MultiIndex> multi_indices(int degree);

/// Moment integrals I_a(P) = int_P x^a dx for all |a| <= degree.
struct MomentSet {
  int degree = 0;
  std::map<MultiIndex, double> values;

  double at(const MultiIndex& a) const;
  double volume() const { return at({0, 0, 0}); }
  /// First moments divided by the volume.
  Vec3 centroid() const;
};

inline constexpr int max_moment_degree = 4;

/// Exact moments of a closed polyhedron with outward-oriented faces.
///
/// Each moment is turned into a sum of face integrals with the divergence
/// theorem; each face integral is projected onto the coordinate plane that
/// maximizes |n_Z| and reduced by Green's theorem to closed-form integrals of
/// polynomials along the projected edges.
MomentSet polyhedron_moments(const ConvexPolyhedron& poly, int degree);

struct FirstMoments {
  double volume = 0.0;
  /// int_P x dx.
  Vec3 first = Vec3::Zero();
};

/// Degree <= 1 moments only, by fanning every face into tetrahedra with a
/// common apex. Same values as polyhedron_moments(poly, 1), much cheaper.
FirstMoments polyhedron_first_moments(const ConvexPolyhedron& poly);

/// int_F x^beta dS over one planar face. `z_axis` selects the projection axis;
/// -1 picks the axis of the largest normal component.
double face_monomial_integral(const PlanarPolygon& face, const MultiIndex& beta, int z_axis = -1);

struct QuadratureRule {
  std::vector<Vec3> points;
  std::vector<double> weights;
  int exact_degree = 0;

  std::size_t size() const { return points.size(); }
  double measure() const;
  double integrate(const std::function<double(const Vec3&)>& f) const;
};

/// One point at the centroid carrying the full volume; exact for degree 1.
QuadratureRule barycenter_rule(double volume, const Vec3& centroid);

struct PolygonMeasure {
  double area = 0.0;
  Vec3 centroid = Vec3::Zero();
  /// Centroid rule; empty for degenerate polygons.
  QuadratureRule rule;
};

/// Area and centroid of a planar polygon via the same projected Green's
/// theorem reduction used for polyhedra.
PolygonMeasure polygon_area_centroid(const PlanarPolygon& polygon);

/// Symmetric rules on the reference tetrahedron (0,0,0),(1,0,0),(0,1,0),(0,0,1)
/// exact for the requested degree: 1 (1 point), 2 (4 points), 4 (14 points,
/// in fact exact to degree 5). All weights are positive and sum to 1/6.
QuadratureRule tet_rule(int exact_degree);

/// Reference rule mapped affinely onto a physical tetrahedron.
QuadratureRule map_to_tet(const QuadratureRule& reference, const TetPoints& tet);

/// Three-point degree-2 rule on a physical triangle.
QuadratureRule triangle_rule(const TriPoints& tri);

/// sum_a coeffs[a] * I_a.
double moment_integrate(const std::map<MultiIndex, double>& coeffs, const MomentSet& moments);

/// Per-entity rule storage: filled once, then frozen and read concurrently.
class QuadratureCache {
public:
  const QuadratureRule& get_or_compute(Index key, const std::function<QuadratureRule()>& compute);
  const QuadratureRule* find(Index key) const;
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  std::size_t size() const { return rules_.size(); }

private:
  std::map<Index, QuadratureRule> rules_;
  bool frozen_ = false;
};

}  // namespace olm
