#pragma once

#include "overlapmesh/linalg.hpp"
#include "overlapmesh/mesh.hpp"
#include "overlapmesh/overlap.hpp"
#include "overlapmesh/quadrature.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace olm {

using ScalarField = std::function<double(const Vec3&)>;
using GradientField = std::function<Vec3(const Vec3&)>;
using VectorField = std::function<Vec3(const Vec3&)>;
using PointPredicate = std::function<bool(const Vec3&)>;

/// Affine P1 basis on one tetrahedron.
struct P1Cell {
  TetPoints points;
  double volume = 0.0;
  /// Column i is the (constant) gradient of the hat function of vertex i.
  Eigen::Matrix<double, 3, 4> grad;

  explicit P1Cell(const TetPoints& tet);
  /// Hat function values at x (barycentric coordinates).
  Eigen::Vector4d values(const Vec3& x) const;
};

/// Global numbering: all background dofs, then all overlapping-mesh dofs;
/// components of one vertex are consecutive.
struct DofMap {
  int value_dim = 1;
  std::size_t num_vertices0 = 0;
  std::size_t num_vertices2 = 0;
  std::vector<bool> active;

  std::size_t size() const { return static_cast<std::size_t>(value_dim) * (num_vertices0 + num_vertices2); }
  Index dof(int mesh, Index vertex, int component = 0) const {
    const Index offset = mesh == 0 ? 0 : static_cast<Index>(num_vertices0);
    return value_dim * (offset + vertex) + component;
  }
  std::size_t num_active() const;
};

/// A background dof is active iff one of its cells contributes volume terms
/// (not overlapped, or cut and not small). Overlapping-mesh dofs are active.
/// A null `overlap` gives a single-mesh map with no overlapping vertices.
DofMap make_dofmap(const TetMesh& t0, const TetMesh* t2, const OverlapData* overlap, int value_dim);

struct NitscheSystem {
  SparseMatrix matrix;
  std::vector<double> rhs;
  double gamma = 0.0;
  DofMap dofmap;
};

struct LocalScalar {
  Eigen::Matrix4d matrix = Eigen::Matrix4d::Zero();
  Eigen::Vector4d vector = Eigen::Vector4d::Zero();
};

/// Exact P1 stiffness and load by `rule` (a rule on the reference tet).
LocalScalar assemble_standard_cell(const TetPoints& tet, const ScalarField& f,
                                   const QuadratureRule& reference_rule);

/// Stiffness scaled by the visible volume; load by the barycenter rule of
/// the visible part. Small cells give zero tensors.
LocalScalar assemble_cut_cell(const TetPoints& tet, const CutCellGeometry& geometry,
                              const ScalarField& f);

using InterfaceBlock = Eigen::Matrix<double, 8, 8>;

/// Scalar coupling block on one facet part. Rows/columns 0-3 are the
/// background cell's vertices, 4-7 the overlapping cell's vertices.
/// The jump is v_2 - v_1 and the flux average the overlapping-side gradient,
/// all evaluated at the part centroid.
InterfaceBlock assemble_interface_part(const InterfaceFacetPart& part, const TetPoints& cell_k,
                                       const TetPoints& cell_l, double gamma, double h);

struct AssemblyTimings {
  double quadrature = 0.0;
  double standard = 0.0;
  double cut = 0.0;
  double interface = 0.0;
  double finalize = 0.0;
};

/// Volume and interface terms only (no ident_zeros, no boundary conditions).
NitscheSystem assemble_poisson_raw(const TetMesh& t0, const TetMesh& t2, const OverlapData& overlap,
                                   const ScalarField& f, double gamma,
                                   AssemblyTimings* timings = nullptr);

/// Raw assembly, ident_zeros, then Dirichlet data `g` at every vertex of
/// the background boundary.
NitscheSystem assemble_poisson(const TetMesh& t0, const TetMesh& t2, const OverlapData& overlap,
                               const ScalarField& f, double gamma, const ScalarField& g,
                               AssemblyTimings* timings = nullptr);

/// Single-mesh P1 Poisson with Dirichlet data on the whole boundary.
NitscheSystem assemble_poisson_single(const TetMesh& mesh, const ScalarField& f, const ScalarField& g);

/// Lamé parameters of one isotropic material.
struct Material {
  double mu = 0.0;
  double lambda = 0.0;
};

/// Throws InvalidArgument unless E > 0 and -1 < nu < 0.5.
Material make_material(double youngs_modulus, double poisson_ratio);

struct MaterialParams {
  Material background;
  Material overlapping;
};

enum class FluxSide { background, overlapping };

struct ElasticityProblem {
  MaterialParams materials;
  double gamma = 50.0;
  FluxSide flux_side = FluxSide::background;
  VectorField f;
  /// Traction on background boundary facets selected by their centroid.
  VectorField g;
  PointPredicate neumann;
  /// Dirichlet values on background boundary vertices selected by position.
  PointPredicate dirichlet;
  VectorField dirichlet_value;
};

NitscheSystem assemble_elasticity(const TetMesh& t0, const TetMesh& t2, const OverlapData& overlap,
                                  const ElasticityProblem& problem,
                                  AssemblyTimings* timings = nullptr);

/// Local 12x12 stiffness of one cell, dof order (vertex, component).
Eigen::Matrix<double, 12, 12> elasticity_stiffness(const P1Cell& cell, const Material& m);

/// Rows without any nonzero entry become identity rows with zero rhs.
/// Returns the modified rows.
std::vector<Index> ident_zeros(NitscheSystem& system);

/// Symmetric elimination. Throws InvalidArgument on a dof listed twice with
/// different values or on a structurally missing diagonal.
void apply_dirichlet(NitscheSystem& system, std::span<const Index> dofs,
                     std::span<const double> values);

struct SolveResult {
  std::vector<double> x;
  SolveReport report;
};

SolveResult solve(const NitscheSystem& system, const CgOptions& options = {});

/// (background part, overlapping part) of a global vector.
std::pair<std::vector<double>, std::vector<double>> distribute_solution(const DofMap& dofmap,
                                                                        std::span<const double> x);

struct ErrorNorms {
  double l2 = 0.0;
  double h1 = 0.0;
  /// sqrt(sum over parts of h^-1 |[u_h]|^2 area), h as in assembly.
  double jump = 0.0;
};

/// Degree-4 rules on uncut cells of both meshes, barycenter rules on cut
/// cells; completely overlapped and small cells are skipped.
ErrorNorms compute_errors(const TetMesh& t0, const TetMesh& t2, const OverlapData& overlap,
                          const DofMap& dofmap, std::span<const double> x, const ScalarField& u,
                          const GradientField& grad_u);

/// Same norms for a single mesh (jump is 0).
ErrorNorms compute_errors_single(const TetMesh& mesh, std::span<const double> x,
                                 const ScalarField& u, const GradientField& grad_u);

/// sqrt(sum over parts of |[u_h]|^2 area) for a vector field (no h scaling).
double interface_jump_l2(const TetMesh& t0, const TetMesh& t2, const OverlapData& overlap,
                         const DofMap& dofmap, std::span<const double> x);

/// Penalty length of a facet part: the longest edge of its background cell.
double part_length_scale(const TetMesh& t0, const InterfaceFacetPart& part);

}  // namespace olm
