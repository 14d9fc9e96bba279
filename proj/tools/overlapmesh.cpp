#include "overlapmesh/errors.hpp"
#include "overlapmesh/studies.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace olm;

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

struct Options {
  std::vector<int> n;
  double gamma = 50.0;
  std::string out;
  unsigned seed = 7;
  int reps = 10;
  std::string mesh0, mesh2;
  bool off = false;
  bool aligned = false;
  double e_background = 1.0;
  double e_overlapping = 10.0;
  double nu = 0.3;
  double traction_scale = 1.0;
  std::string flux_side = "background";
};

void check(const Options& o) {
  for (const int n : o.n)
    if (n < 4) throw InvalidArgument("--n: every N must be >= 4 (got " + std::to_string(n) + ")");
  if (!(o.gamma > 0.0)) throw InvalidArgument("--gamma must be positive");
  if (o.reps < 1) throw InvalidArgument("--reps must be >= 1");
}

// CSV goes to stdout, and to DIR/name as well when --out is given.
void emit(const Options& o, const std::string& name, const std::string& csv) {
  std::cout << csv;
  if (o.out.empty()) return;
  fs::create_directories(o.out);
  std::ofstream f(fs::path(o.out) / name);
  if (!f) throw InvalidArgument("cannot write " + (fs::path(o.out) / name).string());
  f << csv;
}

int run_poisson(Options o) {
  if (o.n.empty()) o.n = {8, 12, 16, 24};
  check(o);
  std::vector<study::PoissonRow> rows;
  bool ok = true;
  for (const int n : o.n) {
    rows.push_back(study::run_poisson(n, o.gamma, !o.aligned, o.seed));
    if (!rows.back().report.converged) {
      ok = false;
      std::cerr << "poisson: N=" << n << " did not converge\n";
    }
  }
  std::ostringstream csv;
  study::write_poisson_csv(csv, rows);
  emit(o, "poisson.csv", csv.str());
  if (rows.size() >= 2 && ok) {
    const auto s = study::convergence_slopes(rows);
    std::cerr << "slopes: L2 " << s.l2 << ", H1 " << s.h1 << '\n';
  }
  return ok ? 0 : exit_numerical;
}

int run_elasticity(Options o) {
  if (o.n.empty()) o.n = {12};
  check(o);
  study::ElasticityConfig cfg;
  cfg.n = o.n.front();
  cfg.gamma = o.gamma;
  cfg.e_background = o.e_background;
  cfg.e_overlapping = o.e_overlapping;
  cfg.nu = o.nu;
  cfg.traction_scale = o.traction_scale;
  cfg.flux_side = o.flux_side == "overlapping" ? FluxSide::overlapping : FluxSide::background;
  const study::ElasticityResult r = study::elasticity_demo(cfg);
  std::ostringstream csv;
  study::write_elasticity_csv(csv, cfg, r);
  emit(o, "elasticity.csv", csv.str());
  if (!o.out.empty()) study::write_elasticity_vtk(o.out, r);
  return r.report.converged ? 0 : exit_numerical;
}

int run_bench(Options o) {
  if (o.n.empty()) o.n = {8, 16, 32};
  check(o);
  std::vector<study::BenchRow> rows;
  for (const int n : o.n) rows.push_back(study::run_bench(n, o.reps));
  std::ostringstream csv;
  study::write_bench_csv(csv, rows);
  emit(o, "bench.csv", csv.str());
  return 0;
}

int run_intersect(Options o) {
  if (o.n.empty()) o.n = {14};
  check(o);
  if (o.mesh0.empty() != o.mesh2.empty())
    throw InvalidArgument("--mesh0 and --mesh2 must be given together");
  study::Meshes m;
  if (o.mesh0.empty()) {
    m = study::poisson_meshes(o.n.front(), !o.aligned);
  } else {
    m.background = read_mesh(fs::path(o.mesh0));
    m.overlapping = read_mesh(fs::path(o.mesh2));
  }
  OverlapData d;
  const study::IntersectReport r = study::intersect(m.background, m.overlapping, o.seed, &d);
  std::ostringstream csv;
  study::write_intersect_csv(csv, r);
  emit(o, "intersect.csv", csv.str());
  if (o.off && !o.out.empty()) {
    std::vector<PlanarPolygon> polys;
    for (const auto& p : d.facet_parts) polys.push_back(p.polygon);
    std::ofstream f(fs::path(o.out) / "interface_parts.off");
    write_off(f, polys);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nitsche FEM on overlapping tetrahedral meshes"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* s) {
    s->add_option("--n", o.n, "mesh sizes (cells per axis)")->delimiter(',');
    s->add_option("--gamma", o.gamma, "Nitsche penalty");
    s->add_option("--out", o.out, "output directory");
    s->add_option("--seed", o.seed, "ray shooting seed");
  };
  auto* poisson = app.add_subcommand("poisson", "Poisson convergence study");
  common(poisson);
  poisson->add_flag("--aligned", o.aligned, "untransformed, grid-aligned overlapping cube");

  auto* elasticity = app.add_subcommand("elasticity", "propeller elasticity demo");
  common(elasticity);
  elasticity->add_option("--e-background", o.e_background, "Young's modulus, background");
  elasticity->add_option("--e-overlapping", o.e_overlapping, "Young's modulus, propeller");
  elasticity->add_option("--nu", o.nu, "Poisson ratio");
  elasticity->add_option("--traction-scale", o.traction_scale, "scale of the top traction");
  elasticity->add_option("--flux-side", o.flux_side, "interface flux side")
      ->check(CLI::IsMember({"background", "overlapping"}));

  auto* bench = app.add_subcommand("bench", "assembly timing breakdown");
  common(bench);
  bench->add_option("--reps", o.reps, "repetitions averaged");

  auto* inter = app.add_subcommand("intersect", "overlap geometry report");
  common(inter);
  inter->add_option("--mesh0", o.mesh0, "background mesh file");
  inter->add_option("--mesh2", o.mesh2, "overlapping mesh file");
  inter->add_flag("--off", o.off, "dump interface polygons as OFF into --out");
  inter->add_flag("--aligned", o.aligned, "untransformed overlapping cube");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  try {
    if (*poisson) return run_poisson(o);
    if (*elasticity) return run_elasticity(o);
    if (*bench) return run_bench(o);
    return run_intersect(o);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const EmptyMeshError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  }
}
