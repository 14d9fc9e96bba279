#include "overlapmesh/fem.hpp"

#include "overlapmesh/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

namespace olm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

double longest_edge(const TetPoints& t) {
  double h = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      h = std::max(h, (t[static_cast<std::size_t>(i)] - t[static_cast<std::size_t>(j)]).norm());
  return h;
}

bool contributes_volume(const OverlapData& overlap, Index c) {
  switch (overlap.cell_class[static_cast<std::size_t>(c)]) {
    case CellClass::NotOverlapped: return true;
    case CellClass::CompletelyOverlapped: return false;
    case CellClass::PartiallyOverlapped: return !overlap.cut_cell(c)->small;
  }
  return false;
}

void add_block(std::vector<Triplet>& out, std::span<const Index> dofs, const auto& block) {
  for (std::size_t i = 0; i < dofs.size(); ++i)
    for (std::size_t j = 0; j < dofs.size(); ++j) {
      const double v = block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (v != 0.0) out.push_back({dofs[i], dofs[j], v});
    }
}

std::array<Index, 4> scalar_dofs(const DofMap& dm, int mesh, const Cell& cell) {
  return {dm.dof(mesh, cell[0]), dm.dof(mesh, cell[1]), dm.dof(mesh, cell[2]), dm.dof(mesh, cell[3])};
}

std::array<Index, 12> vector_dofs(const DofMap& dm, int mesh, const Cell& cell) {
  std::array<Index, 12> d{};
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 3; ++c)
      d[static_cast<std::size_t>(3 * a + c)] = dm.dof(mesh, cell[static_cast<std::size_t>(a)], c);
  return d;
}

void check_part_incidence(const InterfaceFacetPart& part, const TetPoints& cell_l) {
  const double tol = 1e-8 * longest_edge(cell_l);
  if (!point_in_tet(cell_l, part.centroid, tol))
    throw InternalConsistency("interface part " + std::to_string(part.facet) +
                              " is not incident to background cell " + std::to_string(part.cell_l));
}

}  // namespace

P1Cell::P1Cell(const TetPoints& tet) : points(tet) {
  Mat3 j;
  j.col(0) = tet[1] - tet[0];
  j.col(1) = tet[2] - tet[0];
  j.col(2) = tet[3] - tet[0];
  const double det = j.determinant();
  const double l = longest_edge(tet);
  if (!(std::abs(det) > 1e-14 * l * l * l)) throw DegenerateGeometry("P1Cell: degenerate cell");
  volume = std::abs(det) / 6.0;
  const Mat3 inv = j.inverse();
  for (int i = 0; i < 3; ++i) grad.col(i + 1) = inv.row(i).transpose();
  grad.col(0) = -(grad.col(1) + grad.col(2) + grad.col(3));
}

Eigen::Vector4d P1Cell::values(const Vec3& x) const {
  const Vec3 d = x - points[0];
  Eigen::Vector4d v;
  for (int i = 1; i < 4; ++i) v[i] = grad.col(i).dot(d);
  v[0] = 1.0 - v[1] - v[2] - v[3];
  return v;
}

std::size_t DofMap::num_active() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
}

DofMap make_dofmap(const TetMesh& t0, const TetMesh* t2, const OverlapData* overlap, int value_dim) {
  if (value_dim != 1 && value_dim != 3) throw InvalidArgument("make_dofmap: value_dim must be 1 or 3");
  DofMap dm;
  dm.value_dim = value_dim;
  dm.num_vertices0 = t0.num_vertices();
  dm.num_vertices2 = t2 ? t2->num_vertices() : 0;
  dm.active.assign(dm.size(), false);
  std::vector<bool> vertex_active(t0.num_vertices(), false);
  for (std::size_t c = 0; c < t0.num_cells(); ++c) {
    if (overlap && !contributes_volume(*overlap, static_cast<Index>(c))) continue;
    for (const Index v : t0.cell(static_cast<Index>(c))) vertex_active[static_cast<std::size_t>(v)] = true;
  }
  for (std::size_t v = 0; v < t0.num_vertices(); ++v)
    for (int k = 0; k < value_dim; ++k)
      dm.active[static_cast<std::size_t>(dm.dof(0, static_cast<Index>(v), k))] = vertex_active[v];
  for (std::size_t v = 0; v < dm.num_vertices2; ++v)
    for (int k = 0; k < value_dim; ++k)
      dm.active[static_cast<std::size_t>(dm.dof(2, static_cast<Index>(v), k))] = true;
  return dm;
}

LocalScalar assemble_standard_cell(const TetPoints& tet, const ScalarField& f,
                                   const QuadratureRule& reference_rule) {
  const P1Cell p(tet);
  LocalScalar out;
  out.matrix = p.volume * p.grad.transpose() * p.grad;
  if (f) {
    const QuadratureRule rule = map_to_tet(reference_rule, tet);
    for (std::size_t q = 0; q < rule.size(); ++q)
      out.vector += rule.weights[q] * f(rule.points[q]) * p.values(rule.points[q]);
  }
  return out;
}

LocalScalar assemble_cut_cell(const TetPoints& tet, const CutCellGeometry& geometry,
                              const ScalarField& f) {
  LocalScalar out;
  if (geometry.small || geometry.visible_volume <= 0.0) return out;
  const P1Cell p(tet);
  out.matrix = geometry.visible_volume * p.grad.transpose() * p.grad;
  if (f) {
    const Vec3& x = geometry.visible_centroid;
    out.vector = geometry.visible_volume * f(x) * p.values(x);
  }
  return out;
}

InterfaceBlock assemble_interface_part(const InterfaceFacetPart& part, const TetPoints& cell_k,
                                       const TetPoints& cell_l, double gamma, double h) {
  check_part_incidence(part, cell_l);
  const P1Cell p1(cell_l), p2(cell_k);
  const Vec3& x = part.centroid;
  Eigen::Matrix<double, 8, 1> jump, flux;
  jump.head<4>() = -p1.values(x);
  jump.tail<4>() = p2.values(x);
  flux.head<4>().setZero();
  flux.tail<4>() = p2.grad.transpose() * part.normal;
  InterfaceBlock a = -jump * flux.transpose() - flux * jump.transpose() +
                     (gamma / h) * jump * jump.transpose();
  return part.area * a;
}

double part_length_scale(const TetMesh& t0, const InterfaceFacetPart& part) {
  return t0.cell_diameter(part.cell_l);
}

NitscheSystem assemble_poisson_raw(const TetMesh& t0, const TetMesh& t2, const OverlapData& overlap,
                                   const ScalarField& f, double gamma, AssemblyTimings* timings) {
  if (!(gamma >= 0.0)) throw InvalidArgument("assemble_poisson: gamma must be non-negative");
  AssemblyTimings tm;
  NitscheSystem sys;
  sys.gamma = gamma;
  sys.dofmap = make_dofmap(t0, &t2, &overlap, 1);
  sys.rhs.assign(sys.dofmap.size(), 0.0);
  std::vector<Triplet> trip;
  trip.reserve(16 * (t0.num_cells() + t2.num_cells()) + 64 * overlap.facet_parts.size());

  // Cut-cell and interface rules are fixed by the geometry; collect them
  // once before the assembly loops.
  auto t = Clock::now();
  QuadratureCache cut_rules, part_rules;
  for (const auto& g : overlap.cut_cells)
    if (!g.small && g.visible_volume > 0.0)
      cut_rules.get_or_compute(g.cell, [&] { return barycenter_rule(g.visible_volume, g.visible_centroid); });
  for (std::size_t i = 0; i < overlap.facet_parts.size(); ++i) {
    const auto& part = overlap.facet_parts[i];
    part_rules.get_or_compute(static_cast<Index>(i),
                              [&] { return QuadratureRule{{part.centroid}, {part.area}, 1}; });
  }
  cut_rules.freeze();
  part_rules.freeze();
  tm.quadrature = seconds_since(t);

  t = Clock::now();
  const QuadratureRule ref = tet_rule(2);
  auto add_cell = [&](int mesh, const TetMesh& m, Index c) {
    const LocalScalar loc = assemble_standard_cell(m.cell_points(c), f, ref);
    const auto dofs = scalar_dofs(sys.dofmap, mesh, m.cell(c));
    add_block(trip, dofs, loc.matrix);
    for (int i = 0; i < 4; ++i) sys.rhs[static_cast<std::size_t>(dofs[static_cast<std::size_t>(i)])] += loc.vector[i];
  };
  for (std::size_t c = 0; c < t0.num_cells(); ++c)
    if (overlap.cell_class[c] == CellClass::NotOverlapped) add_cell(0, t0, static_cast<Index>(c));
  for (std::size_t c = 0; c < t2.num_cells(); ++c) add_cell(2, t2, static_cast<Index>(c));
  tm.standard = seconds_since(t);

  t = Clock::now();
  for (const auto& g : iterate_cut_cells(overlap)) {
    const QuadratureRule* rule = cut_rules.find(g.cell);
    if (!rule) continue;
    const auto tet = t0.cell_points(g.cell);
    const P1Cell p(tet);
    const Eigen::Matrix4d a = rule->measure() * p.grad.transpose() * p.grad;
    const auto dofs = scalar_dofs(sys.dofmap, 0, t0.cell(g.cell));
    add_block(trip, dofs, a);
    if (f)
      for (std::size_t q = 0; q < rule->size(); ++q) {
        const Eigen::Vector4d b = rule->weights[q] * f(rule->points[q]) * p.values(rule->points[q]);
        for (int i = 0; i < 4; ++i) sys.rhs[static_cast<std::size_t>(dofs[static_cast<std::size_t>(i)])] += b[i];
      }
  }
  tm.cut = seconds_since(t);

  t = Clock::now();
  for (const auto& part : iterate_facet_parts(overlap)) {
    const InterfaceBlock blk = assemble_interface_part(part, t2.cell_points(part.cell_k),
                                                       t0.cell_points(part.cell_l), gamma,
                                                       part_length_scale(t0, part));
    const auto d0 = scalar_dofs(sys.dofmap, 0, t0.cell(part.cell_l));
    const auto d2 = scalar_dofs(sys.dofmap, 2, t2.cell(part.cell_k));
    const std::array<Index, 8> dofs{d0[0], d0[1], d0[2], d0[3], d2[0], d2[1], d2[2], d2[3]};
    add_block(trip, dofs, blk);
  }
  tm.interface = seconds_since(t);

  t = Clock::now();
  sys.matrix = SparseMatrix::from_triplets(sys.dofmap.size(), trip);
  tm.finalize = seconds_since(t);
  if (timings) *timings = tm;
  return sys;
}

namespace {

std::pair<std::vector<Index>, std::vector<double>> boundary_dirichlet(const TetMesh& t0, const DofMap& dm,
                                                                      const ScalarField& g) {
  std::pair<std::vector<Index>, std::vector<double>> out;
  const auto mask = boundary_vertex_mask(t0);
  for (std::size_t v = 0; v < t0.num_vertices(); ++v) {
    if (!mask[v]) continue;
    out.first.push_back(dm.dof(0, static_cast<Index>(v)));
    out.second.push_back(g ? g(t0.vertex(static_cast<Index>(v))) : 0.0);
  }
  return out;
}

}  // namespace

NitscheSystem assemble_poisson(const TetMesh& t0, const TetMesh& t2, const OverlapData& overlap,
                               const ScalarField& f, double gamma, const ScalarField& g,
                               AssemblyTimings* timings) {
  NitscheSystem sys = assemble_poisson_raw(t0, t2, overlap, f, gamma, timings);
  const auto t = Clock::now();
  ident_zeros(sys);
  const auto [dofs, values] = boundary_dirichlet(t0, sys.dofmap, g);
  apply_dirichlet(sys, dofs, values);
  if (timings) timings->finalize += seconds_since(t);
  return sys;
}

NitscheSystem assemble_poisson_single(const TetMesh& mesh, const ScalarField& f, const ScalarField& g) {
  NitscheSystem sys;
  sys.dofmap = make_dofmap(mesh, nullptr, nullptr, 1);
  sys.rhs.assign(sys.dofmap.size(), 0.0);
  std::vector<Triplet> trip;
  trip.reserve(16 * mesh.num_cells());
  const QuadratureRule ref = tet_rule(2);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const LocalScalar loc = assemble_standard_cell(mesh.cell_points(static_cast<Index>(c)), f, ref);
    const auto dofs = scalar_dofs(sys.dofmap, 0, mesh.cell(static_cast<Index>(c)));
    add_block(trip, dofs, loc.matrix);
    for (int i = 0; i < 4; ++i) sys.rhs[static_cast<std::size_t>(dofs[static_cast<std::size_t>(i)])] += loc.vector[i];
  }
  sys.matrix = SparseMatrix::from_triplets(sys.dofmap.size(), trip);
  ident_zeros(sys);
  const auto [dofs, values] = boundary_dirichlet(mesh, sys.dofmap, g);
  apply_dirichlet(sys, dofs, values);
  return sys;
}

Material make_material(double youngs_modulus, double poisson_ratio) {
  if (!(youngs_modulus > 0.0)) throw InvalidArgument("make_material: E must be positive");
  if (!(poisson_ratio > -1.0 && poisson_ratio < 0.5))
    throw InvalidArgument("make_material: Poisson ratio must lie in (-1, 0.5)");
  const double e = youngs_modulus, nu = poisson_ratio;
  return {e / (2.0 + 2.0 * nu), e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))};
}

Eigen::Matrix<double, 12, 12> elasticity_stiffness(const P1Cell& cell, const Material& m) {
  Eigen::Matrix<double, 12, 12> k;
  const auto& g = cell.grad;
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 3; ++c)
      for (int b = 0; b < 4; ++b)
        for (int d = 0; d < 3; ++d) {
          double v = m.mu * g(c, b) * g(d, a) + m.lambda * g(d, b) * g(c, a);
          if (c == d) v += m.mu * g.col(b).dot(g.col(a));
          k(3 * a + c, 3 * b + d) = cell.volume * v;
        }
  return k;
}

namespace {

// Traction sigma(phi_a e_c) n for all 12 local dofs, as columns.
Eigen::Matrix<double, 3, 12> tractions(const P1Cell& cell, const Material& m, const Vec3& n) {
  Eigen::Matrix<double, 3, 12> t;
  for (int a = 0; a < 4; ++a) {
    const Vec3 ga = cell.grad.col(a);
    const double gn = ga.dot(n);
    for (int c = 0; c < 3; ++c) {
      Vec3 s = m.mu * ga * n[c] + m.lambda * ga[c] * n;
      s[c] += m.mu * gn;
      t.col(3 * a + c) = s;
    }
  }
  return t;
}

}  // namespace

NitscheSystem assemble_elasticity(const TetMesh& t0, const TetMesh& t2, const OverlapData& overlap,
                                  const ElasticityProblem& problem, AssemblyTimings* timings) {
  if (!(problem.gamma >= 0.0)) throw InvalidArgument("assemble_elasticity: gamma must be non-negative");
  for (const Material* m : {&problem.materials.background, &problem.materials.overlapping})
    if (!(m->mu > 0.0) || !(m->lambda > -2.0 / 3.0 * m->mu))
      throw InvalidArgument("assemble_elasticity: invalid material");
  AssemblyTimings tm;
  NitscheSystem sys;
  sys.gamma = problem.gamma;
  sys.dofmap = make_dofmap(t0, &t2, &overlap, 3);
  sys.rhs.assign(sys.dofmap.size(), 0.0);
  std::vector<Triplet> trip;
  trip.reserve(144 * (t0.num_cells() + t2.num_cells()) + 576 * overlap.facet_parts.size());

  auto add_rhs = [&](std::span<const Index> dofs, const Eigen::Vector4d& phi, const Vec3& v, double w) {
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 3; ++c)
        sys.rhs[static_cast<std::size_t>(dofs[static_cast<std::size_t>(3 * a + c)])] += w * phi[a] * v[c];
  };

  auto t = Clock::now();
  auto add_cell = [&](int mesh, const TetMesh& m, Index c, const Material& mat, double volume,
                      const QuadratureRule* rule) {
    const P1Cell p(m.cell_points(c));
    const auto dofs = vector_dofs(sys.dofmap, mesh, m.cell(c));
    add_block(trip, dofs, elasticity_stiffness(p, mat) * (volume / p.volume));
    if (!problem.f) return;
    const QuadratureRule mapped = rule ? *rule : map_to_tet(tet_rule(2), p.points);
    for (std::size_t q = 0; q < mapped.size(); ++q)
      add_rhs(dofs, p.values(mapped.points[q]), problem.f(mapped.points[q]), mapped.weights[q]);
  };
  for (std::size_t c = 0; c < t0.num_cells(); ++c)
    if (overlap.cell_class[c] == CellClass::NotOverlapped)
      add_cell(0, t0, static_cast<Index>(c), problem.materials.background, t0.cell_volume(static_cast<Index>(c)), nullptr);
  for (std::size_t c = 0; c < t2.num_cells(); ++c)
    add_cell(2, t2, static_cast<Index>(c), problem.materials.overlapping, t2.cell_volume(static_cast<Index>(c)), nullptr);
  tm.standard = seconds_since(t);

  t = Clock::now();
  for (const auto& g : iterate_cut_cells(overlap)) {
    if (g.small || g.visible_volume <= 0.0) continue;
    const QuadratureRule rule = barycenter_rule(g.visible_volume, g.visible_centroid);
    add_cell(0, t0, g.cell, problem.materials.background, g.visible_volume, &rule);
  }
  tm.cut = seconds_since(t);

  t = Clock::now();
  const bool flux_overlapping = problem.flux_side == FluxSide::overlapping;
  const Material& flux_material =
      flux_overlapping ? problem.materials.overlapping : problem.materials.background;
  for (const auto& part : iterate_facet_parts(overlap)) {
    const TetPoints tl = t0.cell_points(part.cell_l), tk = t2.cell_points(part.cell_k);
    check_part_incidence(part, tl);
    const P1Cell p1(tl), p2(tk);
    const Vec3& x = part.centroid;
    const Eigen::Vector4d v1 = p1.values(x), v2 = p2.values(x);
    // Columns: jump and averaged traction of each of the 24 local dofs.
    Eigen::Matrix<double, 3, 24> jump = Eigen::Matrix<double, 3, 24>::Zero();
    Eigen::Matrix<double, 3, 24> flux = Eigen::Matrix<double, 3, 24>::Zero();
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 3; ++c) {
        jump(c, 3 * a + c) = -v1[a];
        jump(c, 12 + 3 * a + c) = v2[a];
      }
    if (flux_overlapping)
      flux.rightCols<12>() = tractions(p2, flux_material, part.normal);
    else
      flux.leftCols<12>() = tractions(p1, flux_material, part.normal);
    const double h = part_length_scale(t0, part);
    const Eigen::Matrix<double, 24, 24> blk =
        part.area * (-jump.transpose() * flux - flux.transpose() * jump +
                     (problem.gamma / h) * jump.transpose() * jump);
    const auto d0 = vector_dofs(sys.dofmap, 0, t0.cell(part.cell_l));
    const auto d2 = vector_dofs(sys.dofmap, 2, t2.cell(part.cell_k));
    std::array<Index, 24> dofs{};
    std::copy(d0.begin(), d0.end(), dofs.begin());
    std::copy(d2.begin(), d2.end(), dofs.begin() + 12);
    add_block(trip, dofs, blk);
  }
  tm.interface = seconds_since(t);

  t = Clock::now();
  if (problem.g && problem.neumann) {
    const SurfaceMesh outer = boundary(t0);
    for (std::size_t i = 0; i < outer.num_triangles(); ++i) {
      const Index c = outer.parent_cell[i];
      if (!contributes_volume(overlap, c)) continue;
      const TriPoints tri = outer.triangle_points(static_cast<Index>(i));
      if (!problem.neumann((tri[0] + tri[1] + tri[2]) / 3.0)) continue;
      const P1Cell p(t0.cell_points(c));
      const auto dofs = vector_dofs(sys.dofmap, 0, t0.cell(c));
      const QuadratureRule rule = triangle_rule(tri);
      for (std::size_t q = 0; q < rule.size(); ++q)
        add_rhs(dofs, p.values(rule.points[q]), problem.g(rule.points[q]), rule.weights[q]);
    }
  }
  sys.matrix = SparseMatrix::from_triplets(sys.dofmap.size(), trip);
  ident_zeros(sys);
  if (problem.dirichlet) {
    std::vector<Index> dofs;
    std::vector<double> values;
    const auto mask = boundary_vertex_mask(t0);
    for (std::size_t v = 0; v < t0.num_vertices(); ++v) {
      const Vec3& x = t0.vertex(static_cast<Index>(v));
      if (!mask[v] || !problem.dirichlet(x)) continue;
      const Vec3 u = problem.dirichlet_value ? problem.dirichlet_value(x) : Vec3::Zero();
      for (int c = 0; c < 3; ++c) {
        dofs.push_back(sys.dofmap.dof(0, static_cast<Index>(v), c));
        values.push_back(u[c]);
      }
    }
    apply_dirichlet(sys, dofs, values);
  }
  tm.finalize = seconds_since(t);
  if (timings) *timings = tm;
  return sys;
}

std::vector<Index> ident_zeros(NitscheSystem& system) {
  std::vector<Index> rows;
  SparseMatrix& a = system.matrix;
  const std::size_t n = a.dim();
  std::vector<Triplet> extra;
  for (std::size_t i = 0; i < n; ++i) {
    const auto vals = a.row_values(i);
    if (std::any_of(vals.begin(), vals.end(), [](double v) { return v != 0.0; })) continue;
    rows.push_back(static_cast<Index>(i));
    system.rhs[i] = 0.0;
    if (double* d = a.find(i, i)) *d = 1.0;
    else extra.push_back({static_cast<Index>(i), static_cast<Index>(i), 1.0});
  }
  if (!extra.empty()) {
    // Rebuild with the missing diagonals; the pattern changes.
    std::vector<Triplet> all;
    all.reserve(a.nnz() + extra.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto cols = a.row_cols(i);
      const auto vals = std::as_const(a).row_values(i);
      for (std::size_t k = 0; k < cols.size(); ++k) all.push_back({static_cast<Index>(i), cols[k], vals[k]});
    }
    all.insert(all.end(), extra.begin(), extra.end());
    a = SparseMatrix::from_triplets(n, all);
  }
  return rows;
}

void apply_dirichlet(NitscheSystem& system, std::span<const Index> dofs,
                     std::span<const double> values) {
  if (dofs.size() != values.size()) throw InvalidArgument("apply_dirichlet: size mismatch");
  SparseMatrix& a = system.matrix;
  const std::size_t n = a.dim();
  std::map<Index, double> bc;
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    if (dofs[i] < 0 || static_cast<std::size_t>(dofs[i]) >= n)
      throw InvalidArgument("apply_dirichlet: dof out of range");
    const auto [it, inserted] = bc.emplace(dofs[i], values[i]);
    if (!inserted && it->second != values[i])
      throw InvalidArgument("apply_dirichlet: conflicting values for dof " + std::to_string(dofs[i]));
  }
  for (const auto& [i, g] : bc) {
    const auto row = static_cast<std::size_t>(i);
    if (!a.find(row, row)) throw InvalidArgument("apply_dirichlet: missing diagonal entry");
    const auto cols = a.row_cols(row);
    auto vals = a.row_values(row);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const auto r = static_cast<std::size_t>(cols[k]);
      if (r != row) {
        // Symmetric pattern: entry (r, i) exists whenever (i, r) does.
        if (double* e = a.find(r, row)) {
          system.rhs[r] -= *e * g;
          *e = 0.0;
        }
      }
      vals[k] = 0.0;
    }
    *a.find(row, row) = 1.0;
  }
  for (const auto& [i, g] : bc) system.rhs[static_cast<std::size_t>(i)] = g;
}

SolveResult solve(const NitscheSystem& system, const CgOptions& options) {
  SolveResult r;
  r.x.assign(system.rhs.size(), 0.0);
  r.report = cg_solve(system.matrix, system.rhs, r.x, options);
  return r;
}

std::pair<std::vector<double>, std::vector<double>> distribute_solution(const DofMap& dofmap,
                                                                        std::span<const double> x) {
  if (x.size() != dofmap.size()) throw InvalidArgument("distribute_solution: size mismatch");
  const std::size_t split = static_cast<std::size_t>(dofmap.value_dim) * dofmap.num_vertices0;
  return {std::vector<double>(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(split)),
          std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(split), x.end())};
}

namespace {

Eigen::Vector4d local_values(const DofMap& dm, int mesh, const Cell& cell, std::span<const double> x) {
  Eigen::Vector4d u;
  for (int i = 0; i < 4; ++i) u[i] = x[static_cast<std::size_t>(dm.dof(mesh, cell[static_cast<std::size_t>(i)]))];
  return u;
}

void accumulate_cell_errors(const P1Cell& p, const Eigen::Vector4d& uh, const QuadratureRule& rule,
                            const ScalarField& u, const GradientField& grad_u, double& l2, double& h1) {
  const Vec3 gh = p.grad * uh;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec3& x = rule.points[q];
    const double e = u(x) - p.values(x).dot(uh);
    l2 += rule.weights[q] * e * e;
    h1 += rule.weights[q] * (grad_u(x) - gh).squaredNorm();
  }
}

}  // namespace

ErrorNorms compute_errors(const TetMesh& t0, const TetMesh& t2, const OverlapData& overlap,
                          const DofMap& dofmap, std::span<const double> x, const ScalarField& u,
                          const GradientField& grad_u) {
  if (x.size() != dofmap.size()) throw InvalidArgument("compute_errors: size mismatch");
  const QuadratureRule ref = tet_rule(4);
  double l2 = 0.0, h1 = 0.0, jump = 0.0;
  for (std::size_t c = 0; c < t0.num_cells(); ++c) {
    const auto ci = static_cast<Index>(c);
    const auto cls = overlap.cell_class[c];
    if (cls == CellClass::CompletelyOverlapped) continue;
    const P1Cell p(t0.cell_points(ci));
    const auto uh = local_values(dofmap, 0, t0.cell(ci), x);
    if (cls == CellClass::NotOverlapped) {
      accumulate_cell_errors(p, uh, map_to_tet(ref, p.points), u, grad_u, l2, h1);
    } else {
      const CutCellGeometry& g = *overlap.cut_cell(ci);
      if (g.small || g.visible_volume <= 0.0) continue;
      accumulate_cell_errors(p, uh, barycenter_rule(g.visible_volume, g.visible_centroid), u, grad_u,
                             l2, h1);
    }
  }
  for (std::size_t c = 0; c < t2.num_cells(); ++c) {
    const auto ci = static_cast<Index>(c);
    const P1Cell p(t2.cell_points(ci));
    accumulate_cell_errors(p, local_values(dofmap, 2, t2.cell(ci), x), map_to_tet(ref, p.points), u,
                           grad_u, l2, h1);
  }
  for (const auto& part : overlap.facet_parts) {
    const P1Cell p1(t0.cell_points(part.cell_l)), p2(t2.cell_points(part.cell_k));
    const double j = p2.values(part.centroid).dot(local_values(dofmap, 2, t2.cell(part.cell_k), x)) -
                     p1.values(part.centroid).dot(local_values(dofmap, 0, t0.cell(part.cell_l), x));
    jump += part.area * j * j / part_length_scale(t0, part);
  }
  return {std::sqrt(l2), std::sqrt(h1), std::sqrt(jump)};
}

ErrorNorms compute_errors_single(const TetMesh& mesh, std::span<const double> x, const ScalarField& u,
                                 const GradientField& grad_u) {
  const DofMap dm = make_dofmap(mesh, nullptr, nullptr, 1);
  if (x.size() != dm.size()) throw InvalidArgument("compute_errors_single: size mismatch");
  const QuadratureRule ref = tet_rule(4);
  double l2 = 0.0, h1 = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto ci = static_cast<Index>(c);
    const P1Cell p(mesh.cell_points(ci));
    accumulate_cell_errors(p, local_values(dm, 0, mesh.cell(ci), x), map_to_tet(ref, p.points), u,
                           grad_u, l2, h1);
  }
  return {std::sqrt(l2), std::sqrt(h1), 0.0};
}

double interface_jump_l2(const TetMesh& t0, const TetMesh& t2, const OverlapData& overlap,
                         const DofMap& dofmap, std::span<const double> x) {
  if (x.size() != dofmap.size()) throw InvalidArgument("interface_jump_l2: size mismatch");
  double s = 0.0;
  for (const auto& part : overlap.facet_parts) {
    const P1Cell p1(t0.cell_points(part.cell_l)), p2(t2.cell_points(part.cell_k));
    const Eigen::Vector4d v1 = p1.values(part.centroid), v2 = p2.values(part.centroid);
    Vec3 j = Vec3::Zero();
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 3; ++c) {
        j[c] += v2[a] * x[static_cast<std::size_t>(dofmap.dof(2, t2.cell(part.cell_k)[static_cast<std::size_t>(a)], c))];
        j[c] -= v1[a] * x[static_cast<std::size_t>(dofmap.dof(0, t0.cell(part.cell_l)[static_cast<std::size_t>(a)], c))];
      }
    s += part.area * j.squaredNorm();
  }
  return std::sqrt(s);
}

}  // namespace olm
