#pragma once

#include "overlapmesh/fem.hpp"
#include "overlapmesh/overlap.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace olm::study {

// Poisson test problem: unit cube background overlapped by the cube
// [0.3331, 0.6669]^3 rotated by 20 degrees about (1,1,1)/sqrt(3) through
// its center and shifted by (0.01, -0.005, 0.0075).
inline constexpr double inner_lo = 0.3331;
inline constexpr double inner_hi = 0.6669;

Mat3 poisson_rotation();
Vec3 poisson_translation();

struct Meshes {
  TetMesh background;
  TetMesh overlapping;
};

/// Background unit_cube_mesh(n); overlapping cube meshed with
/// max(1, round((hi - lo) n)) cells per axis, transformed unless
/// `transformed` is false.
Meshes poisson_meshes(int n, bool transformed = true);

double manufactured_u(const Vec3& x);
Vec3 manufactured_grad(const Vec3& x);
double manufactured_f(const Vec3& x);

struct TimingBreakdown {
  double tree_build = 0.0;
  double collision = 0.0;
  double classification = 0.0;
  double interface_decomposition = 0.0;
  double cut_cells = 0.0;
  double quadrature = 0.0;
  double standard_assembly = 0.0;
  double interface_assembly = 0.0;
  double solve = 0.0;

  double geometry() const {
    return tree_build + collision + classification + interface_decomposition + cut_cells;
  }
  TimingBreakdown& operator+=(const TimingBreakdown& o);
  TimingBreakdown& operator/=(double s);
};

struct PoissonRow {
  int n = 0;
  double h = 0.0;
  std::size_t dofs = 0;
  ErrorNorms errors;
  SolveReport report;
  TimingBreakdown timings;
};

PoissonRow run_poisson(int n, double gamma, bool transformed = true, unsigned seed = 0);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ConvergenceSlopes {
  double l2 = 0.0;
  double h1 = 0.0;
};

/// Slopes of the errors against h (positive for decreasing errors).
ConvergenceSlopes convergence_slopes(const std::vector<PoissonRow>& rows);

void write_poisson_csv(std::ostream& out, const std::vector<PoissonRow>& rows);

struct ElasticityConfig {
  int n = 12;
  double gamma = 50.0;
  double e_overlapping = 10.0;
  double e_background = 1.0;
  double nu = 0.3;
  double traction_scale = 1.0;
  FluxSide flux_side = FluxSide::background;
};

/// Propeller (-1,1) x P, P = (-1,1)x(-0.2,0.2) U (-0.2,0.2)x(-1,1), cut out
/// of a 10^3-cube mesh of (-1,1)^3.
TetMesh propeller_mesh();

/// Rotational plus pressure traction on the top face z = 2.
Vec3 propeller_traction(const Vec3& x);

struct ElasticityResult {
  Meshes meshes;
  OverlapData overlap;
  DofMap dofmap;
  std::vector<double> x;
  SolveReport report;
  double max_displacement = 0.0;
  double jump_l2 = 0.0;
};

/// Background (-2,2)^3 with n cells per axis, clamped at z = -2, traction on
/// z = 2, traction-free elsewhere.
ElasticityResult elasticity_demo(const ElasticityConfig& config);

/// u_background / u_overlapping displacement files in `dir`.
void write_elasticity_vtk(const std::filesystem::path& dir, const ElasticityResult& r);

void write_elasticity_csv(std::ostream& out, const ElasticityConfig& c, const ElasticityResult& r);

struct BenchRow {
  int n = 0;
  std::size_t cells = 0;
  std::size_t cut_cells = 0;
  std::size_t facet_parts = 0;
  TimingBreakdown nitsche;
  /// Whole Nitsche assembly: geometry, quadrature, all assembly stages.
  double nitsche_assembly = 0.0;
  /// Single-mesh P1 assembly of the background mesh alone.
  double standard_fem_assembly = 0.0;
};

BenchRow run_bench(int n, int reps);
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

struct IntersectReport {
  OverlapSummary summary;
  std::size_t background_cells = 0;
  std::size_t overlapping_cells = 0;
  std::size_t boundary_facets = 0;
};

IntersectReport intersect(const TetMesh& t0, const TetMesh& t2, unsigned seed = 0,
                          OverlapData* data = nullptr);
void write_intersect_csv(std::ostream& out, const IntersectReport& r);

}  // namespace olm::study
