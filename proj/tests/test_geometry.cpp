#include "overlapmesh/errors.hpp"
#include "overlapmesh/geometry.hpp"
#include "overlapmesh/quadrature.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace olm;
using olm::testing::random_tet;

namespace {

const TetPoints ref_tet{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};

double volume_of(const ConvexPolyhedron& p) { return p.empty() ? 0.0 : polyhedron_moments(p, 0).volume(); }

double area_of(const PlanarPolygon& p) { return polygon_vector_area(p.vertices).norm(); }

Plane random_plane(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const Vec3 n = Vec3(g(rng), g(rng), g(rng)).normalized();
  return {n, n.dot(testing::random_point(rng, 0.2, 0.8))};
}

}  // namespace

TEST_CASE("tet halfspaces of the reference tet") {
  const auto h = tet_halfspaces(ref_tet);
  // Plane i is opposite vertex i.
  CHECK((h[0].normal - Vec3(1, 1, 1).normalized()).norm() < 1e-15);
  CHECK(std::abs(h[0].offset - 1.0 / std::sqrt(3.0)) < 1e-15);
  for (int i = 1; i < 4; ++i) {
    CHECK((h[static_cast<std::size_t>(i)].normal + Vec3::Unit(i - 1)).norm() < 1e-15);
    CHECK(std::abs(h[static_cast<std::size_t>(i)].offset) < 1e-15);
  }
  const Vec3 c = Vec3::Constant(0.25);
  for (const Plane& p : h) CHECK(p.signed_distance(c) < 0.0);
  for (int v = 0; v < 4; ++v) {
    int on = 0, in = 0;
    for (const Plane& p : h) {
      const double d = p.signed_distance(ref_tet[static_cast<std::size_t>(v)]);
      if (std::abs(d) < 1e-15) ++on;
      else if (d < 0) ++in;
    }
    CHECK(on == 3);
    CHECK(in == 1);
  }
  const TetPoints flat{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)};
  CHECK_THROWS_AS(tet_halfspaces(flat), DegenerateGeometry);
}

TEST_CASE("clip polyhedron by a half-space") {
  const ConvexPolyhedron cube = ConvexPolyhedron::box(Vec3::Zero(), Vec3::Ones());
  const ConvexPolyhedron same = clip_polyhedron_halfspace(cube, {Vec3::UnitX(), 2.0});
  CHECK(std::abs(volume_of(same) - 1.0) < 1e-14);
  CHECK(clip_polyhedron_halfspace(cube, {Vec3::UnitX(), -1.0}).empty());

  const ConvexPolyhedron half = clip_polyhedron_halfspace(cube, {Vec3::UnitX(), 0.5});
  CHECK(std::abs(volume_of(half) - 0.5) < 1e-12);
  CHECK(half.faces.size() == 6);
  CHECK(count_unpaired_edges(half) == 0);

  // Plane through a face keeps the cube.
  CHECK(std::abs(volume_of(clip_polyhedron_halfspace(cube, {Vec3::UnitX(), 1.0})) - 1.0) < 1e-14);
}

TEST_CASE("clipping monotonicity, complement additivity and closure") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const ConvexPolyhedron p = ConvexPolyhedron::from_tet(random_tet(rng));
    const Plane h = random_plane(rng);
    const ConvexPolyhedron a = clip_polyhedron_halfspace(p, h);
    const ConvexPolyhedron b = clip_polyhedron_halfspace(p, h.flipped());
    const double v = volume_of(p);
    CHECK(volume_of(a) <= v * (1 + 1e-12));
    CHECK(std::abs(volume_of(a) + volume_of(b) - v) <= 1e-10 * v);
    if (!a.empty()) CHECK(count_unpaired_edges(a) == 0);
    if (!b.empty()) CHECK(count_unpaired_edges(b) == 0);
  }
}

TEST_CASE("tet-tet intersection") {
  CHECK(std::abs(volume_of(tet_tet_intersection(ref_tet, ref_tet)) - 1.0 / 6.0) < 1e-12 / 6.0);
  TetPoints far = ref_tet;
  for (auto& p : far) p += Vec3(3, 0, 0);
  CHECK(tet_tet_intersection(ref_tet, far).empty());

  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    const TetPoints a = random_tet(rng), b = random_tet(rng);
    const ConvexPolyhedron ab = tet_tet_intersection(a, b), ba = tet_tet_intersection(b, a);
    const double vab = volume_of(ab), vba = volume_of(ba);
    CHECK(std::abs(vab - vba) <= 1e-10 * std::max(vab, 1e-300) + 1e-15);
    if (!ab.empty()) CHECK(count_unpaired_edges(ab) == 0);
  }
}

TEST_CASE("tet-tet intersection volume against Monte Carlo") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 4; ++i) {
    const TetPoints a = random_tet(rng), b = random_tet(rng);
    const auto ha = tet_halfspaces(a), hb = tet_halfspaces(b);
    const double v = volume_of(tet_tet_intersection(a, b));
    Aabb box;
    box.expand(Vec3::Zero());
    box.expand(Vec3::Ones());
    const auto mc = testing::monte_carlo(rng, box, 1'000'000, [&](const Vec3& x) {
      return testing::inside_all(ha, x) && testing::inside_all(hb, x) ? 1.0 : 0.0;
    });
    CHECK(std::abs(v - mc.mean) <= 3.0 * mc.stderr_ + 1e-12);
  }
}

TEST_CASE("clip triangle by tet") {
  const TriPoints inner{Vec3(0.1, 0.1, 0.1), Vec3(0.3, 0.1, 0.1), Vec3(0.1, 0.3, 0.1)};
  const PlanarPolygon p = clip_triangle_tet(inner, ref_tet);
  CHECK(p.vertices.size() == 3);
  CHECK(std::abs(area_of(p) - 0.02) < 1e-14);

  const TriPoints outside{Vec3(2, 2, 2), Vec3(3, 2, 2), Vec3(2, 3, 2)};
  CHECK(clip_triangle_tet(outside, ref_tet).empty());

  // The cells of a mesh tile the cube, so clipped pieces add up.
  const TetMesh m = unit_cube_mesh(3);
  const TriPoints tri{Vec3(0.12, 0.21, 0.33), Vec3(0.91, 0.17, 0.52), Vec3(0.4, 0.87, 0.71)};
  const double area = 0.5 * (tri[1] - tri[0]).cross(tri[2] - tri[0]).norm();
  const Vec3 n = (tri[1] - tri[0]).cross(tri[2] - tri[0]).normalized();
  double sum = 0.0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const PlanarPolygon piece = clip_triangle_tet(tri, m.cell_points(static_cast<Index>(c)));
    if (piece.empty()) continue;
    CHECK(polygon_vector_area(piece.vertices).dot(n) > 0.0);
    sum += area_of(piece);
  }
  CHECK(std::abs(sum - area) <= 1e-10 * area);
}

TEST_CASE("tet-triangle predicate") {
  const TriPoints through{Vec3(-1, -1, 0.25), Vec3(3, -1, 0.25), Vec3(-1, 3, 0.25)};
  CHECK(tet_triangle_intersects(ref_tet, through));
  const TriPoints far{Vec3(5, 5, 5), Vec3(6, 5, 5), Vec3(5, 6, 5)};
  CHECK_FALSE(tet_triangle_intersects(ref_tet, far));

  // Agreement with the clipping oracle away from the tolerance band.
  std::mt19937_64 rng(23);
  int checked = 0;
  for (int i = 0; i < 100000; ++i) {
    const TetPoints t = random_tet(rng, 0.0, 1.0);
    const TriPoints tri{testing::random_point(rng, 0.0, 1.0), testing::random_point(rng, 0.0, 1.0),
                        testing::random_point(rng, 0.0, 1.0)};
    if ((tri[1] - tri[0]).cross(tri[2] - tri[0]).norm() < 1e-6) continue;
    const double a = area_of(clip_triangle_tet(tri, t));
    double scale = 0.0;
    for (const Vec3& p : t) scale = std::max(scale, (p - t[0]).norm());
    if (a >= 0.0 && a <= eps_geom * scale * scale) {
      if (a == 0.0) {
        // Strictly empty clips may still be tolerance contacts; only check
        // clear separations.
        const Aabb bt = bbox_of(t), bf = bbox_of(tri);
        if (!bt.intersects(bf)) CHECK_FALSE(tet_triangle_intersects(t, tri));
      }
      continue;
    }
    ++checked;
    CHECK(tet_triangle_intersects(t, tri));
  }
  CHECK(checked > 1000);
}

TEST_CASE("ray triangle intersection") {
  const TriPoints tri{Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 2, 0)};
  const auto hit = ray_triangle_intersect(Vec3(0.5, 0.5, -1), Vec3(0, 0, 1), tri);
  REQUIRE(hit);
  CHECK(std::abs(hit->t - 1.0) < 1e-15);
  CHECK_FALSE(hit->degenerate);
  CHECK_FALSE(ray_triangle_intersect(Vec3(0.5, 0.5, -1), Vec3(0, 0, -1), tri));
  const auto corner = ray_triangle_intersect(Vec3(0, 0, -1), Vec3(0, 0, 1), tri);
  REQUIRE(corner);
  CHECK(corner->degenerate);
  const auto edge = ray_triangle_intersect(Vec3(1, 0, -1), Vec3(0, 0, 1), tri);
  REQUIRE(edge);
  CHECK(edge->degenerate);
}

TEST_CASE("bounding boxes") {
  const Vec3 p(1, 2, 3);
  const Aabb b = bbox_of(std::span<const Vec3>(&p, 1));
  CHECK(b.min == p);
  CHECK(b.max == p);
  const Aabb t = bbox_of(ref_tet);
  CHECK(t.min == Vec3::Zero());
  CHECK(t.max == Vec3::Ones());
  const Aabb e = enlarge(t, 0.0);
  CHECK(e.min == t.min);
  CHECK(e.max == t.max);
  const Aabb g = enlarge(t, 0.5);
  CHECK(g.min == Vec3::Constant(-0.5));
  CHECK(g.max == Vec3::Constant(1.5));
}

TEST_CASE("off output") {
  std::ostringstream out;
  write_off(out, ConvexPolyhedron::box(Vec3::Zero(), Vec3::Ones()));
  std::istringstream in(out.str());
  std::string tag;
  std::size_t nv = 0, nf = 0;
  in >> tag >> nv >> nf;
  CHECK(tag == "OFF");
  CHECK(nf == 6);
  CHECK(nv >= 8);
}
