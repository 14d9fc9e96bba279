#include "overlapmesh/errors.hpp"
#include "overlapmesh/mesh.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

using namespace olm;

namespace {

// Euler characteristic V - E + F of a triangle surface.
long euler_characteristic(const SurfaceMesh& s) {
  std::set<std::pair<Index, Index>> edges;
  std::set<Index> verts;
  for (const auto& t : s.triangles)
    for (int i = 0; i < 3; ++i) {
      const Index a = t[i], b = t[(i + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
      verts.insert(a);
    }
  return static_cast<long>(verts.size()) - static_cast<long>(edges.size()) +
         static_cast<long>(s.num_triangles());
}

}  // namespace

TEST_CASE("unit cube mesh counts and volume") {
  const TetMesh m1 = unit_cube_mesh(1);
  CHECK(m1.num_vertices() == 8);
  CHECK(m1.num_cells() == 6);
  CHECK(m1.total_volume() == doctest::Approx(1.0).epsilon(1e-15));

  const TetMesh m3 = unit_cube_mesh(3);
  CHECK(m3.num_vertices() == 64);
  CHECK(m3.num_cells() == 162);

  const TetMesh m4 = unit_cube_mesh(4);
  CHECK(std::abs(m4.total_volume() - 1.0) < 1e-14);
  for (std::size_t c = 0; c < m4.num_cells(); ++c) CHECK(m4.cell_volume(static_cast<Index>(c)) > 0.0);
  CHECK(count_overshared_facets(m4) == 0);

  CHECK_THROWS_AS(unit_cube_mesh(0), InvalidArgument);
}

TEST_CASE("box mesh") {
  const TetMesh big = box_mesh(Vec3::Constant(-2), Vec3::Constant(2), {2, 2, 2});
  CHECK(std::abs(big.total_volume() - 64.0) < 1e-12);

  const TetMesh a = box_mesh(Vec3::Zero(), Vec3::Ones(), {1, 1, 1});
  const TetMesh b = unit_cube_mesh(1);
  CHECK(a.cells() == b.cells());
  CHECK(a.vertices() == b.vertices());

  const TetMesh slab = box_mesh(Vec3::Zero(), Vec3(2, 1, 1), {2, 1, 1});
  CHECK(slab.num_cells() == 12);
  CHECK(std::abs(slab.total_volume() - 2.0) < 1e-12);

  CHECK_THROWS_AS(box_mesh(Vec3::Ones(), Vec3::Zero(), {1, 1, 1}), InvalidArgument);
  CHECK_THROWS_AS(box_mesh(Vec3::Zero(), Vec3::Ones(), {1, 0, 1}), InvalidArgument);
}

TEST_CASE("transform") {
  const TetMesh m = unit_cube_mesh(2);
  const TetMesh same = transform(m, Mat3::Identity(), Vec3::Zero());
  CHECK(same.vertices() == m.vertices());

  const TetMesh shifted = transform(m, Mat3::Identity(), Vec3(1, 0, 0));
  for (std::size_t v = 0; v < m.num_vertices(); ++v)
    CHECK(shifted.vertices()[v] == m.vertices()[v] + Vec3(1, 0, 0));

  const Mat3 rz = Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitZ()).toRotationMatrix();
  CHECK(std::abs(transform(m, rz, Vec3::Zero()).total_volume() - 1.0) < 1e-12);

  std::mt19937_64 rng(11);
  const Mat3 r = testing::random_rotation(rng);
  const TetMesh rot = transform(m, r, Vec3(0.3, -1, 2));
  for (std::size_t c = 0; c < m.num_cells(); ++c)
    CHECK(std::abs(rot.cell_volume(static_cast<Index>(c)) - m.cell_volume(static_cast<Index>(c))) <
          1e-12 * m.cell_volume(static_cast<Index>(c)));

  Mat3 reflect = Mat3::Identity();
  reflect(0, 0) = -1;
  CHECK_THROWS_AS(transform(m, reflect, Vec3::Zero()), InvalidArgument);
}

TEST_CASE("extract submesh") {
  const TetMesh m = unit_cube_mesh(2);
  const TetMesh all = extract_submesh(m, [](const Vec3&) { return true; });
  CHECK(all.num_cells() == m.num_cells());
  CHECK(std::abs(all.total_volume() - m.total_volume()) < 1e-15);

  const TetMesh half = extract_submesh(m, [](const Vec3& c) { return c[0] < 0.5; });
  CHECK(std::abs(half.total_volume() - 0.5) < 1e-12);

  // (-1,1) x P with P the plus-shaped cross section; the 0.2 cell layers
  // align with |y|, |z| < 0.2, so the extraction is exact.
  const TetMesh block = box_mesh(Vec3::Constant(-1), Vec3::Constant(1), {10, 10, 10});
  const TetMesh prop = extract_submesh(block, [](const Vec3& c) {
    return std::abs(c[2]) < 0.2 || std::abs(c[1]) < 0.2;
  });
  const double cross_section = 2.0 * 0.4 + 2.0 * 0.4 - 0.4 * 0.4;
  CHECK(std::abs(prop.total_volume() - 2.0 * cross_section) < 1e-12);
  CHECK(std::abs(2.0 * cross_section - 2.88) < 1e-12);
  CHECK(is_watertight(boundary(prop)));
}

TEST_CASE("boundary surface") {
  const SurfaceMesh s1 = boundary(unit_cube_mesh(1));
  CHECK(s1.num_triangles() == 12);
  CHECK(std::abs(s1.total_area() - 6.0) < 1e-12);

  for (int n : {1, 2, 3, 5}) {
    const TetMesh m = unit_cube_mesh(n);
    const SurfaceMesh s = boundary(m);
    CHECK(s.num_triangles() == static_cast<std::size_t>(12 * n * n));
    CHECK(euler_characteristic(s) == 2);
    CHECK(is_watertight(s));
    for (std::size_t t = 0; t < s.num_triangles(); ++t) {
      const auto tri = s.triangle_points(static_cast<Index>(t));
      const Vec3 c = (tri[0] + tri[1] + tri[2]) / 3.0;
      CHECK((c - m.cell_centroid(s.parent_cell[t])).dot(s.triangle_normal(static_cast<Index>(t))) > 0.0);
    }
  }

  // A surface with one triangle removed has open edges.
  SurfaceMesh open = s1;
  open.triangles.pop_back();
  CHECK(count_open_edges(open) == 3);

  const auto mask = boundary_vertex_mask(unit_cube_mesh(2));
  CHECK(std::count(mask.begin(), mask.end(), true) == 26);
}

TEST_CASE("mesh io round trip") {
  const TetMesh m = unit_cube_mesh(2);
  std::stringstream ss;
  write_mesh(m, ss);
  const TetMesh r = read_mesh(ss);
  CHECK(r.num_vertices() == m.num_vertices());
  CHECK(r.num_cells() == m.num_cells());
  CHECK(r.cells() == m.cells());
  CHECK(r.vertices() == m.vertices());
}

TEST_CASE("mesh io errors and orientation") {
  std::istringstream bad("tetmesh 4 1\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n0 1 2 7\n");
  CHECK_THROWS_AS(read_mesh(bad), ParseError);

  std::istringstream truncated("tetmesh 4 1\n0 0 0\n1 0 0\n");
  CHECK_THROWS_AS(read_mesh(truncated), ParseError);

  std::istringstream header("tetrahedra 4 1\n");
  CHECK_THROWS_AS(read_mesh(header), ParseError);

  // Negatively oriented cell is accepted and flipped.
  std::istringstream neg("tetmesh 4 1\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n0 2 1 3\n");
  const TetMesh m = read_mesh(neg);
  CHECK(std::abs(m.cell_volume(0) - 1.0 / 6.0) < 1e-15);
  const auto p = m.cell_points(0);
  CHECK(signed_volume(p[0], p[1], p[2], p[3]) > 0.0);

  CHECK_THROWS_AS(TetMesh({Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), Vec3(1, 1, 0)}, {Cell{0, 1, 2, 3}}),
                  DegenerateGeometry);
  CHECK_THROWS_AS(TetMesh({Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()}, {Cell{0, 1, 1, 3}}),
                  InvalidArgument);
}

TEST_CASE("facet incidence") {
  const TetMesh m = unit_cube_mesh(3);
  std::map<std::array<Index, 3>, int> count;
  for (const auto& c : m.cells())
    for (int i = 0; i < 4; ++i) {
      std::array<Index, 3> f{};
      int k = 0;
      for (int j = 0; j < 4; ++j)
        if (j != i) f[static_cast<std::size_t>(k++)] = c[static_cast<std::size_t>(j)];
      std::sort(f.begin(), f.end());
      ++count[f];
    }
  for (const auto& [f, n] : count) CHECK((n == 1 || n == 2));
}
