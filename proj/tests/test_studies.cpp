#include "overlapmesh/errors.hpp"
#include "overlapmesh/studies.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace olm;

namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("manufactured solution") {
  const double k = 2.0 * std::numbers::pi;
  const Vec3 x(0.1, 0.35, 0.8);
  const double u = std::sin(k * x[0]) * std::sin(k * x[1]) * std::sin(k * x[2]);
  CHECK(std::abs(study::manufactured_u(x) - u) < 1e-15);
  CHECK(std::abs(study::manufactured_f(x) - 3.0 * k * k * u) < 1e-12);
  // Central differences of u against the analytic gradient.
  const double d = 1e-6;
  for (int i = 0; i < 3; ++i) {
    const Vec3 e = d * Vec3::Unit(i);
    const double fd = (study::manufactured_u(x + e) - study::manufactured_u(x - e)) / (2 * d);
    CHECK(std::abs(fd - study::manufactured_grad(x)[i]) < 1e-7);
  }
  CHECK(study::manufactured_u(Vec3(0.0, 0.3, 0.7)) == 0.0);
}

TEST_CASE("poisson configuration") {
  const auto m = study::poisson_meshes(12);
  CHECK(m.background.num_cells() == 6u * 12 * 12 * 12);
  CHECK(m.overlapping.num_cells() == 6u * 4 * 4 * 4);
  const auto a = study::poisson_meshes(3, false);
  CHECK(a.overlapping.num_cells() == 6u);
  // The rotation fixes the axis and the center moves by the translation only.
  const Mat3 r = study::poisson_rotation();
  CHECK((r * Vec3::Ones() - Vec3::Ones()).norm() < 1e-14);
  CHECK(std::abs(r.determinant() - 1.0) < 1e-14);
  CHECK(std::abs(std::acos((r.trace() - 1.0) / 2.0) - 20.0 * std::numbers::pi / 180.0) < 1e-12);
  Vec3 c = Vec3::Zero();
  for (const Vec3& v : m.overlapping.vertices()) c += v;
  c /= static_cast<double>(m.overlapping.num_vertices());
  CHECK((c - Vec3::Constant(0.5) - study::poisson_translation()).norm() < 1e-12);
}

TEST_CASE("slopes") {
  CHECK(std::abs(study::loglog_slope({1, 2, 4}, {1, 4, 16}) - 2.0) < 1e-14);
  CHECK(std::abs(study::loglog_slope({0.5, 0.25}, {3, 3}) - 0.0) < 1e-14);
  CHECK_THROWS_AS(study::loglog_slope({1}, {1}), InvalidArgument);
  CHECK_THROWS_AS(study::loglog_slope({1, 2}, {1, 0}), InvalidArgument);
  CHECK_THROWS_AS(study::loglog_slope({1, 2}, {1}), InvalidArgument);
}

TEST_CASE("penalty sweep") {
  std::vector<study::PoissonRow> rows;
  for (double gamma : {10.0, 50.0, 200.0}) rows.push_back(study::run_poisson(12, gamma));
  double lo = 1e300, hi = 0.0;
  for (const auto& r : rows) {
    CHECK(r.report.converged);
    lo = std::min(lo, r.errors.l2);
    hi = std::max(hi, r.errors.l2);
  }
  CHECK(hi <= 2.0 * lo);
  std::ostringstream out;
  study::write_poisson_csv(out, rows);
  CHECK(first_line(out.str()).rfind("N,h,dofs,L2,H1,jump_norm,iterations,converged", 0) == 0);
  CHECK(count_lines(out.str()) == 4);
}

TEST_CASE("convergence on two levels") {
  std::vector<study::PoissonRow> rows{study::run_poisson(8, 50.0), study::run_poisson(16, 50.0)};
  const auto s = study::convergence_slopes(rows);
  CHECK(rows[1].errors.l2 < rows[0].errors.l2);
  CHECK(rows[1].errors.h1 < rows[0].errors.h1);
  CHECK(s.l2 > 1.5);
  CHECK(s.h1 > 0.7);
  CHECK(rows[0].h == doctest::Approx(0.125));
  // Same geometry without the rotation also converges.
  const auto aligned = study::run_poisson(8, 50.0, false);
  CHECK(aligned.report.converged);
  CHECK(aligned.errors.l2 < 2.0 * rows[0].errors.l2);
}

TEST_CASE("elasticity study") {
  study::ElasticityConfig c;
  c.n = 8;
  c.traction_scale = 0.0;
  const auto none = study::elasticity_demo(c);
  CHECK(none.report.converged);
  CHECK(none.max_displacement == 0.0);

  c.traction_scale = 1.0;
  const auto base = study::elasticity_demo(c);
  REQUIRE(base.report.converged);
  CHECK(base.max_displacement > 0.0);
  CHECK(base.jump_l2 <= 0.05 * base.max_displacement);

  // Linear elasticity: doubling both moduli halves the displacement.
  c.e_background *= 2.0;
  c.e_overlapping *= 2.0;
  const auto stiff = study::elasticity_demo(c);
  CHECK(std::abs(stiff.max_displacement - 0.5 * base.max_displacement) <= 0.01 * base.max_displacement);

  std::ostringstream out;
  study::write_elasticity_csv(out, c, stiff);
  CHECK(first_line(out.str()).rfind("N,gamma,E_background,E_overlapping,nu,dofs", 0) == 0);

  const auto dir = std::filesystem::temp_directory_path() / "olm_test_studies_vtk";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  study::write_elasticity_vtk(dir, base);
  for (const char* name : {"elasticity_background.vtk", "elasticity_overlapping.vtk"}) {
    std::ifstream in(dir / name);
    REQUIRE(in);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("# vtk DataFile Version", 0) == 0);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("propeller geometry") {
  const TetMesh p = study::propeller_mesh();
  // (2 * 2 * 0.4) * 2 minus the shared 0.4 * 0.4 * 2 column.
  double vol = 0.0;
  for (std::size_t c = 0; c < p.num_cells(); ++c) vol += p.cell_volume(static_cast<Index>(c));
  CHECK(std::abs(vol - (2 * 1.6 - 0.32)) < 1e-12);
  for (const Vec3& v : p.vertices()) CHECK((v.array().abs() <= 1.0 + 1e-14).all());
  const Vec3 t = study::propeller_traction(Vec3(1, 0, 2));
  CHECK(t.norm() > 0.0);
}

TEST_CASE("intersect study") {
  const auto m = study::poisson_meshes(10);
  OverlapData d;
  const auto r = study::intersect(m.background, m.overlapping, 3, &d);
  CHECK(r.background_cells == m.background.num_cells());
  CHECK(r.overlapping_cells == m.overlapping.num_cells());
  CHECK(r.boundary_facets == d.surface.num_triangles());
  const double s = study::inner_hi - study::inner_lo;
  CHECK(std::abs(r.summary.visible_volume - (1 - s * s * s)) <= 1e-8);

  std::ostringstream a, b;
  study::write_intersect_csv(a, r);
  study::write_intersect_csv(b, study::intersect(m.background, m.overlapping, 3));
  CHECK(a.str() == b.str());
  CHECK(first_line(a.str()).rfind("background_cells,overlapping_cells,boundary_facets", 0) == 0);

  const TetMesh far = transform(m.overlapping, Mat3::Identity(), Vec3(10, 0, 0));
  const auto none = study::intersect(m.background, far);
  CHECK(none.summary.interface_area == 0.0);
  CHECK(std::abs(none.summary.visible_volume - 1.0) < 1e-12);
}

TEST_CASE("bench study") {
  const auto row = study::run_bench(6, 1);
  CHECK(row.cells == 6u * 6 * 6 * 6);
  CHECK(row.cut_cells > 0);
  CHECK(row.facet_parts > 0);
  CHECK(row.nitsche_assembly > 0.0);
  CHECK(row.standard_fem_assembly > 0.0);
  std::ostringstream out;
  study::write_bench_csv(out, {row});
  CHECK(first_line(out.str()).rfind("N,cells,cut_cells,facet_parts,tree_build", 0) == 0);
  CHECK(count_lines(out.str()) == 2);
}
