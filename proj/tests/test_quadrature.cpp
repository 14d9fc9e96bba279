#include "overlapmesh/errors.hpp"
#include "overlapmesh/quadrature.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace olm;

namespace {

const TetPoints ref_tet{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};

double monomial(const MultiIndex& a, const Vec3& x) {
  return std::pow(x[0], a[0]) * std::pow(x[1], a[1]) * std::pow(x[2], a[2]);
}

// Random tet in the unit cube clipped by three random planes through points
// near its centroid, nonempty.
ConvexPolyhedron random_clipped(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  for (;;) {
    const TetPoints t = testing::random_tet(rng);
    const Vec3 c = (t[0] + t[1] + t[2] + t[3]) / 4.0;
    ConvexPolyhedron p = ConvexPolyhedron::from_tet(t);
    for (int k = 0; k < 3 && !p.empty(); ++k) {
      const Vec3 n = Vec3(g(rng), g(rng), g(rng)).normalized();
      p = clip_polyhedron_halfspace(p, {n, n.dot(c) + 0.05 * g(rng)});
    }
    if (!p.empty() && polyhedron_moments(p, 0).volume() > 1e-3) return p;
  }
}

bool inside(const ConvexPolyhedron& p, const Vec3& x) {
  for (const auto& f : p.faces)
    if (f.normal.dot(x - f.vertices.front()) > 0.0) return false;
  return true;
}

}  // namespace

TEST_CASE("moments of the unit cube and reference tet") {
  const MomentSet c = polyhedron_moments(ConvexPolyhedron::box(Vec3::Zero(), Vec3::Ones()), 3);
  CHECK(std::abs(c.at({0, 0, 0}) - 1.0) < 1e-13);
  CHECK(std::abs(c.at({1, 0, 0}) - 0.5) < 1e-13);
  CHECK(std::abs(c.at({2, 0, 0}) - 1.0 / 3.0) < 1e-13);
  CHECK(std::abs(c.at({1, 1, 0}) - 0.25) < 1e-13);
  CHECK(std::abs(c.at({1, 1, 1}) - 0.125) < 1e-13);

  const MomentSet t = polyhedron_moments(ConvexPolyhedron::from_tet(ref_tet), 2);
  CHECK(std::abs(t.volume() - 1.0 / 6.0) < 1e-13);
  CHECK(std::abs(t.at({1, 0, 0}) - 1.0 / 24.0) < 1e-13);
  CHECK((t.centroid() - Vec3::Constant(0.25)).norm() < 1e-13);
  CHECK(std::abs(t.at({2, 0, 0}) - 1.0 / 60.0) < 1e-13);
  CHECK(std::abs(t.at({1, 1, 0}) - 1.0 / 120.0) < 1e-13);

  CHECK_THROWS_AS(polyhedron_moments(ConvexPolyhedron::from_tet(ref_tet), 5), InvalidArgument);
  CHECK_THROWS_AS(t.at({3, 0, 0}), InvalidArgument);
}

TEST_CASE("moments of clipped polyhedra against Monte Carlo") {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 3; ++i) {
    const ConvexPolyhedron p = random_clipped(rng);
    const MomentSet m = polyhedron_moments(p, 2);
    const Aabb box = bbox_of(p);
    for (const MultiIndex& a : multi_indices(2)) {
      std::mt19937_64 local(1000 + i);
      const auto mc = testing::monte_carlo(local, box, 400'000, [&](const Vec3& x) {
        return inside(p, x) ? monomial(a, x) : 0.0;
      });
      CHECK(std::abs(m.at(a) - mc.mean) <= 3.0 * mc.stderr_ + 1e-14);
    }
  }
}

TEST_CASE("first moments agree with the general integrator") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const ConvexPolyhedron p = random_clipped(rng);
    const MomentSet m = polyhedron_moments(p, 1);
    const FirstMoments f = polyhedron_first_moments(p);
    CHECK(std::abs(f.volume - m.volume()) <= 1e-13);
    CHECK((f.first - Vec3(m.at({1, 0, 0}), m.at({0, 1, 0}), m.at({0, 0, 1}))).norm() <= 1e-13);
  }
  CHECK(polyhedron_first_moments(ConvexPolyhedron{}).volume == 0.0);
}

TEST_CASE("moment additivity and translation covariance") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int i = 0; i < 30; ++i) {
    const ConvexPolyhedron p = random_clipped(rng);
    const MomentSet whole = polyhedron_moments(p, 3);
    const Vec3 c = whole.centroid();
    const Vec3 n = Vec3(g(rng), g(rng), g(rng)).normalized();
    const Plane h{n, n.dot(c)};
    const MomentSet a = polyhedron_moments(clip_polyhedron_halfspace(p, h), 3);
    const MomentSet b = polyhedron_moments(clip_polyhedron_halfspace(p, h.flipped()), 3);
    for (const auto& alpha : multi_indices(3)) {
      const double w = whole.at(alpha);
      CHECK(std::abs(a.at(alpha) + b.at(alpha) - w) <= 1e-10 * std::max(std::abs(w), whole.volume()));
    }

    const Vec3 shift(0.3, -1.2, 2.5);
    ConvexPolyhedron q = p;
    for (auto& f : q.faces)
      for (auto& v : f.vertices) v += shift;
    const MomentSet moved = polyhedron_moments(q, 1);
    CHECK(std::abs(moved.volume() - whole.volume()) <= 1e-12 * whole.volume());
    CHECK((moved.centroid() - (c + shift)).norm() <= 1e-12);
  }
}

TEST_CASE("projection axis independence") {
  const PlanarPolygon face{{Vec3(0.1, 0.2, 0.3), Vec3(0.9, 0.4, 0.5), Vec3(0.5, 1.1, 0.8), Vec3(0.2, 0.8, 0.6)},
                           Vec3::Zero()};
  PlanarPolygon f = face;
  f.normal = polygon_vector_area(f.vertices).normalized();
  // Make the quad exactly planar by projecting the last vertex.
  const Vec3 n = (f.vertices[1] - f.vertices[0]).cross(f.vertices[2] - f.vertices[0]).normalized();
  f.vertices[3] -= n.dot(f.vertices[3] - f.vertices[0]) * n;
  f.normal = n;
  for (const auto& beta : multi_indices(3)) {
    const double ref = face_monomial_integral(f, beta, -1);
    for (int z = 0; z < 3; ++z)
      CHECK(std::abs(face_monomial_integral(f, beta, z) - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
  }
  const PlanarPolygon xy{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, Vec3::UnitZ()};
  CHECK_THROWS_AS(face_monomial_integral(xy, {0, 0, 0}, 0), DegenerateGeometry);
}

TEST_CASE("barycenter rule") {
  const QuadratureRule cube = barycenter_rule(1.0, Vec3::Constant(0.5));
  CHECK(cube.integrate([](const Vec3&) { return 1.0; }) == 1.0);
  CHECK(cube.exact_degree == 1);
  const QuadratureRule tet = barycenter_rule(1.0 / 6.0, Vec3::Constant(0.25));
  CHECK(std::abs(tet.integrate([](const Vec3& x) { return x[0]; }) - 1.0 / 24.0) < 1e-16);
  CHECK(std::abs(cube.integrate([](const Vec3& x) { return x[0] * x[0]; }) - 0.25) < 1e-16);
  CHECK_THROWS_AS(barycenter_rule(0.0, Vec3::Zero()), InvalidArgument);
}

TEST_CASE("polygon area and centroid") {
  const PlanarPolygon tri{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, Vec3::UnitZ()};
  const PolygonMeasure m = polygon_area_centroid(tri);
  CHECK(std::abs(m.area - 0.5) < 1e-15);
  CHECK((m.centroid - Vec3(1.0 / 3.0, 1.0 / 3.0, 0)).norm() < 1e-15);
  REQUIRE(m.rule.size() == 1);
  CHECK(m.rule.weights[0] == m.area);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const Mat3 r = testing::random_rotation(rng);
    PlanarPolygon rot{{}, r * tri.normal};
    for (const Vec3& v : tri.vertices) rot.vertices.push_back(r * v + Vec3(1, 2, 3));
    const PolygonMeasure mr = polygon_area_centroid(rot);
    CHECK(std::abs(mr.area - 0.5) < 1e-12);
    CHECK((mr.centroid - (r * m.centroid + Vec3(1, 2, 3))).norm() < 1e-12);
  }

  const PlanarPolygon sliver{{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 1e-13, 0)}, Vec3::UnitZ()};
  const PolygonMeasure s = polygon_area_centroid(sliver);
  CHECK(s.area == 0.0);
  CHECK(s.rule.size() == 0);
}

TEST_CASE("reference tet rules") {
  for (int d : {1, 2, 4}) {
    const QuadratureRule r = tet_rule(d);
    CHECK(std::abs(r.measure() - 1.0 / 6.0) < 1e-14);
    for (double w : r.weights) CHECK(w > 0.0);
    CHECK(std::abs(r.integrate([](const Vec3& x) { return x[0]; }) - 1.0 / 24.0) < 1e-15);
  }
  CHECK(std::abs(tet_rule(2).integrate([](const Vec3& x) { return x[0] * x[0]; }) - 1.0 / 60.0) < 1e-14);
  CHECK(std::abs(tet_rule(2).integrate([](const Vec3& x) { return x[1] * x[2]; }) - 1.0 / 120.0) < 1e-14);
  // Degree 4: compare every monomial with the exact moments.
  const MomentSet exact = polyhedron_moments(ConvexPolyhedron::from_tet(ref_tet), 4);
  const QuadratureRule r4 = tet_rule(4);
  for (const auto& a : multi_indices(4))
    CHECK(std::abs(r4.integrate([&](const Vec3& x) { return monomial(a, x); }) - exact.at(a)) < 1e-14);
  CHECK_THROWS_AS(tet_rule(3), InvalidArgument);
}

TEST_CASE("mapped and triangle rules integrate constants to the measure") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 10; ++i) {
    const TetPoints t = testing::random_tet(rng);
    for (int d : {1, 2, 4})
      CHECK(std::abs(map_to_tet(tet_rule(d), t).measure() - tet_volume(t)) <= 1e-12 * tet_volume(t));
    const TriPoints tri{t[0], t[1], t[2]};
    const double area = 0.5 * (t[1] - t[0]).cross(t[2] - t[0]).norm();
    const QuadratureRule tr = triangle_rule(tri);
    CHECK(std::abs(tr.measure() - area) <= 1e-12 * area);
    // Degree 2 exactness on a triangle: int x^2 = A/6 (a^2 + b^2 + c^2 + ab + bc + ca).
    const double a = tri[0][0], b = tri[1][0], c = tri[2][0];
    const double exact = area / 6.0 * (a * a + b * b + c * c + a * b + b * c + c * a);
    CHECK(std::abs(tr.integrate([](const Vec3& x) { return x[0] * x[0]; }) - exact) <= 1e-13);
  }
}

TEST_CASE("moment integration") {
  const MomentSet c = polyhedron_moments(ConvexPolyhedron::box(Vec3::Zero(), Vec3::Ones()), 2);
  CHECK(std::abs(moment_integrate({{{0, 0, 0}, 2.5}}, c) - 2.5) < 1e-14);
  CHECK(std::abs(moment_integrate({{{1, 0, 0}, 1.0}, {{0, 1, 0}, 1.0}, {{0, 0, 1}, 1.0}}, c) - 1.5) < 1e-13);
  CHECK_THROWS_AS(moment_integrate({{{3, 0, 0}, 1.0}}, c), InvalidArgument);

  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 3; ++i) {
    const ConvexPolyhedron p = random_clipped(rng);
    std::map<MultiIndex, double> coeffs;
    for (const auto& a : multi_indices(2)) coeffs[a] = u(rng);
    const double v = moment_integrate(coeffs, polyhedron_moments(p, 2));
    std::mt19937_64 local(900 + i);
    const auto mc = testing::monte_carlo(local, bbox_of(p), 400'000, [&](const Vec3& x) {
      if (!inside(p, x)) return 0.0;
      double s = 0.0;
      for (const auto& [a, k] : coeffs) s += k * monomial(a, x);
      return s;
    });
    CHECK(std::abs(v - mc.mean) <= 3.0 * mc.stderr_ + 1e-14);
  }
}

TEST_CASE("quadrature cache") {
  QuadratureCache cache;
  int calls = 0;
  auto make = [&] {
    ++calls;
    return barycenter_rule(1.0, Vec3::Zero());
  };
  const QuadratureRule& a = cache.get_or_compute(3, make);
  const QuadratureRule& b = cache.get_or_compute(3, make);
  CHECK(&a == &b);
  CHECK(calls == 1);
  cache.freeze();
  CHECK(cache.find(3) == &a);
  CHECK(cache.find(4) == nullptr);
  CHECK_THROWS_AS(cache.get_or_compute(4, make), InternalConsistency);
}
