#include "overlapmesh/studies.hpp"

#include "overlapmesh/errors.hpp"
#include "overlapmesh/vtk.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

namespace olm::study {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace

Mat3 poisson_rotation() {
  return Eigen::AngleAxisd(20.0 * std::numbers::pi / 180.0, Vec3(1, 1, 1).normalized()).toRotationMatrix();
}

Vec3 poisson_translation() { return {0.01, -0.005, 0.0075}; }

Meshes poisson_meshes(int n, bool transformed) {
  if (n < 1) throw InvalidArgument("poisson_meshes: n must be positive");
  Meshes m;
  m.background = unit_cube_mesh(n);
  const int n2 = std::max(1, static_cast<int>(std::lround((inner_hi - inner_lo) * n)));
  TetMesh inner = box_mesh(Vec3::Constant(inner_lo), Vec3::Constant(inner_hi), {n2, n2, n2});
  if (transformed) {
    const Mat3 r = poisson_rotation();
    const Vec3 c = Vec3::Constant(0.5);
    inner = transform(inner, r, c - r * c + poisson_translation());
  }
  m.overlapping = std::move(inner);
  return m;
}

double manufactured_u(const Vec3& x) {
  return std::sin(two_pi * x[0]) * std::sin(two_pi * x[1]) * std::sin(two_pi * x[2]);
}

Vec3 manufactured_grad(const Vec3& x) {
  const double sx = std::sin(two_pi * x[0]), sy = std::sin(two_pi * x[1]), sz = std::sin(two_pi * x[2]);
  const double cx = std::cos(two_pi * x[0]), cy = std::cos(two_pi * x[1]), cz = std::cos(two_pi * x[2]);
  return two_pi * Vec3(cx * sy * sz, sx * cy * sz, sx * sy * cz);
}

double manufactured_f(const Vec3& x) { return 3.0 * two_pi * two_pi * manufactured_u(x); }

TimingBreakdown& TimingBreakdown::operator+=(const TimingBreakdown& o) {
  tree_build += o.tree_build;
  collision += o.collision;
  classification += o.classification;
  interface_decomposition += o.interface_decomposition;
  cut_cells += o.cut_cells;
  quadrature += o.quadrature;
  standard_assembly += o.standard_assembly;
  interface_assembly += o.interface_assembly;
  solve += o.solve;
  return *this;
}

TimingBreakdown& TimingBreakdown::operator/=(double s) {
  tree_build /= s;
  collision /= s;
  classification /= s;
  interface_decomposition /= s;
  cut_cells /= s;
  quadrature /= s;
  standard_assembly /= s;
  interface_assembly /= s;
  solve /= s;
  return *this;
}

namespace {

TimingBreakdown merge(const OverlapTimings& o, const AssemblyTimings& a) {
  TimingBreakdown t;
  t.tree_build = o.tree_build;
  t.collision = o.collision;
  t.classification = o.classification;
  t.interface_decomposition = o.interface_decomposition;
  t.cut_cells = o.cut_cells;
  t.quadrature = a.quadrature;
  // Cut-cell volume terms and matrix finalization are standard-type work.
  t.standard_assembly = a.standard + a.cut + a.finalize;
  t.interface_assembly = a.interface;
  return t;
}

}  // namespace

PoissonRow run_poisson(int n, double gamma, bool transformed, unsigned seed) {
  const Meshes m = poisson_meshes(n, transformed);
  OverlapTimings ot;
  const OverlapData d = build_overlap(m.background, m.overlapping, &ot, seed);
  AssemblyTimings at;
  const NitscheSystem sys = assemble_poisson(m.background, m.overlapping, d, manufactured_f, gamma,
                                             [](const Vec3&) { return 0.0; }, &at);
  PoissonRow row;
  row.n = n;
  row.h = 1.0 / n;
  row.dofs = sys.dofmap.size();
  row.timings = merge(ot, at);
  const auto t = Clock::now();
  SolveResult r;
  try {
    r = solve(sys);
  } catch (const IndefiniteMatrix&) {
    r.x.assign(sys.rhs.size(), 0.0);
    r.report.converged = false;
    r.report.relative_residual = std::numeric_limits<double>::quiet_NaN();
  }
  row.timings.solve = seconds_since(t);
  row.report = r.report;
  row.errors = compute_errors(m.background, m.overlapping, d, sys.dofmap, r.x, manufactured_u,
                              manufactured_grad);
  return row;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("loglog_slope: need >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0 && y[i] > 0)) throw InvalidArgument("loglog_slope: values must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceSlopes convergence_slopes(const std::vector<PoissonRow>& rows) {
  std::vector<double> h, l2, h1;
  for (const auto& r : rows) {
    h.push_back(r.h);
    l2.push_back(r.errors.l2);
    h1.push_back(r.errors.h1);
  }
  return {loglog_slope(h, l2), loglog_slope(h, h1)};
}

void write_poisson_csv(std::ostream& out, const std::vector<PoissonRow>& rows) {
  out << "N,h,dofs,L2,H1,jump_norm,iterations,converged,relative_residual,tree_build,collision,"
         "classification,interface_decomposition,cut_cells,quadrature,standard_assembly,"
         "interface_assembly,solve\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    const auto& t = r.timings;
    out << r.n << ',' << r.h << ',' << r.dofs << ',' << r.errors.l2 << ',' << r.errors.h1 << ','
        << r.errors.jump << ',' << r.report.iterations << ',' << (r.report.converged ? 1 : 0) << ','
        << r.report.relative_residual << ',' << t.tree_build << ',' << t.collision << ','
        << t.classification << ',' << t.interface_decomposition << ',' << t.cut_cells << ','
        << t.quadrature << ',' << t.standard_assembly << ',' << t.interface_assembly << ',' << t.solve
        << '\n';
  }
}

TetMesh propeller_mesh() {
  const TetMesh block = box_mesh(Vec3::Constant(-1.0), Vec3::Constant(1.0), {10, 10, 10});
  return extract_submesh(block, [](const Vec3& c) {
    return std::abs(c[2]) < 0.2 || std::abs(c[1]) < 0.2;
  });
}

Vec3 propeller_traction(const Vec3& x) {
  const double r = std::hypot(x[0], x[1]);
  Vec3 g(0.0, 0.0, -(2.0 - r));
  if (r > 0.0) g += Vec3(-x[1], x[0], 0.0) / (5.0 * r);
  return g;
}

ElasticityResult elasticity_demo(const ElasticityConfig& config) {
  if (config.n < 1) throw InvalidArgument("elasticity_demo: n must be positive");
  ElasticityResult res;
  res.meshes.background = box_mesh(Vec3::Constant(-2.0), Vec3::Constant(2.0), {config.n, config.n, config.n});
  res.meshes.overlapping = propeller_mesh();
  res.overlap = build_overlap(res.meshes.background, res.meshes.overlapping);

  ElasticityProblem p;
  p.materials.background = make_material(config.e_background, config.nu);
  p.materials.overlapping = make_material(config.e_overlapping, config.nu);
  p.gamma = config.gamma;
  p.flux_side = config.flux_side;
  const double scale = config.traction_scale;
  p.g = [scale](const Vec3& x) -> Vec3 { return scale * propeller_traction(x); };
  p.neumann = [](const Vec3& c) { return c[2] > 2.0 - 1e-9; };
  p.dirichlet = [](const Vec3& x) { return x[2] < -2.0 + 1e-9; };

  const NitscheSystem sys =
      assemble_elasticity(res.meshes.background, res.meshes.overlapping, res.overlap, p);
  res.dofmap = sys.dofmap;
  SolveResult r = solve(sys);
  res.x = std::move(r.x);
  res.report = r.report;
  for (std::size_t i = 0; i + 2 < res.x.size(); i += 3)
    res.max_displacement = std::max(res.max_displacement, Vec3(res.x[i], res.x[i + 1], res.x[i + 2]).norm());
  res.jump_l2 = interface_jump_l2(res.meshes.background, res.meshes.overlapping, res.overlap,
                                  res.dofmap, res.x);
  return res;
}

void write_elasticity_vtk(const std::filesystem::path& dir, const ElasticityResult& r) {
  auto [u0, u2] = distribute_solution(r.dofmap, r.x);
  std::vector<int> cls;
  for (const auto c : r.overlap.cell_class) cls.push_back(static_cast<int>(c));
  vtk::write_unstructured_grid(dir / "elasticity_background.vtk", r.meshes.background,
                               {{"u_background", 3, std::move(u0)}}, {{"cell_class", cls}},
                               "elasticity background");
  vtk::write_unstructured_grid(dir / "elasticity_overlapping.vtk", r.meshes.overlapping,
                               {{"u_overlapping", 3, std::move(u2)}}, {}, "elasticity overlapping");
}

void write_elasticity_csv(std::ostream& out, const ElasticityConfig& c, const ElasticityResult& r) {
  out << "N,gamma,E_background,E_overlapping,nu,dofs,iterations,converged,max_displacement,"
         "interface_jump_l2,jump_ratio\n";
  out << std::setprecision(10) << c.n << ',' << c.gamma << ',' << c.e_background << ','
      << c.e_overlapping << ',' << c.nu << ',' << r.dofmap.size() << ',' << r.report.iterations << ','
      << (r.report.converged ? 1 : 0) << ',' << r.max_displacement << ',' << r.jump_l2 << ','
      << (r.max_displacement > 0 ? r.jump_l2 / r.max_displacement : 0.0) << '\n';
}

BenchRow run_bench(int n, int reps) {
  if (reps < 1) throw InvalidArgument("run_bench: reps must be >= 1");
  const Meshes m = poisson_meshes(n);
  BenchRow row;
  row.n = n;
  row.cells = m.background.num_cells();
  const ScalarField zero = [](const Vec3&) { return 0.0; };
  for (int r = 0; r < reps; ++r) {
    auto t = Clock::now();
    OverlapTimings ot;
    const OverlapData d = build_overlap(m.background, m.overlapping, &ot);
    AssemblyTimings at;
    const NitscheSystem sys =
        assemble_poisson(m.background, m.overlapping, d, manufactured_f, 50.0, zero, &at);
    row.nitsche_assembly += seconds_since(t);
    row.nitsche += merge(ot, at);
    row.cut_cells = d.cut_cells.size();
    row.facet_parts = d.facet_parts.size();

    t = Clock::now();
    const NitscheSystem single = assemble_poisson_single(m.background, manufactured_f, zero);
    row.standard_fem_assembly += seconds_since(t);

    t = Clock::now();
    SolveResult s = solve(sys);
    row.nitsche.solve += seconds_since(t);
    (void)single;
    (void)s;
  }
  row.nitsche /= reps;
  row.nitsche_assembly /= reps;
  row.standard_fem_assembly /= reps;
  return row;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "N,cells,cut_cells,facet_parts,tree_build,collision,classification,interface_decomposition,"
         "cut_cells_time,quadrature,standard_assembly,interface_assembly,solve,nitsche_assembly,"
         "standard_fem_assembly\n";
  out << std::setprecision(8);
  for (const auto& r : rows) {
    const auto& t = r.nitsche;
    out << r.n << ',' << r.cells << ',' << r.cut_cells << ',' << r.facet_parts << ',' << t.tree_build
        << ',' << t.collision << ',' << t.classification << ',' << t.interface_decomposition << ','
        << t.cut_cells << ',' << t.quadrature << ',' << t.standard_assembly << ','
        << t.interface_assembly << ',' << t.solve << ',' << r.nitsche_assembly << ','
        << r.standard_fem_assembly << '\n';
  }
}

IntersectReport intersect(const TetMesh& t0, const TetMesh& t2, unsigned seed, OverlapData* data) {
  IntersectReport r;
  OverlapData d = build_overlap(t0, t2, nullptr, seed);
  r.summary = summarize(t0, d);
  r.background_cells = t0.num_cells();
  r.overlapping_cells = t2.num_cells();
  r.boundary_facets = d.surface.num_triangles();
  if (data) *data = std::move(d);
  return r;
}

void write_intersect_csv(std::ostream& out, const IntersectReport& r) {
  const auto& s = r.summary;
  out << "background_cells,overlapping_cells,boundary_facets,not_overlapped,completely_overlapped,"
         "partially_overlapped,small_cells,facet_parts,visible_volume,interface_area\n";
  out << r.background_cells << ',' << r.overlapping_cells << ',' << r.boundary_facets << ','
      << s.not_overlapped << ',' << s.completely_overlapped << ',' << s.partially_overlapped << ','
      << s.small_cells << ',' << s.facet_parts << ',' << std::setprecision(17) << s.visible_volume
      << ',' << s.interface_area << '\n';
}

}  // namespace olm::study
