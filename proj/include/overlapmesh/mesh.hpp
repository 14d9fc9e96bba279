#pragma once

#include "overlapmesh/types.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace olm {

using Cell = std::array<Index, 4>;
using Triangle = std::array<Index, 3>;

/// Tetrahedral volume mesh. Immutable after construction.
///
/// Construction validates vertex indices, rejects repeated vertices within a
/// cell and zero-volume cells, and swaps two vertices of every cell whose
/// signed volume is negative, so every stored cell is positively oriented.
class TetMesh {
public:
  TetMesh() = default;
  TetMesh(std::vector<Vec3> vertices, std::vector<Cell> cells,
          std::vector<int> markers = {});

  std::size_t num_vertices() const noexcept { return vertices_.size(); }
  std::size_t num_cells() const noexcept { return cells_.size(); }
  bool empty() const noexcept { return cells_.empty(); }

  const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
  const std::vector<Cell>& cells() const noexcept { return cells_; }
  /// Per-cell marker; empty when the mesh carries none.
  const std::vector<int>& markers() const noexcept { return markers_; }

  const Vec3& vertex(Index v) const { return vertices_[static_cast<std::size_t>(v)]; }
  const Cell& cell(Index c) const { return cells_[static_cast<std::size_t>(c)]; }

  TetPoints cell_points(Index c) const;
  double cell_volume(Index c) const;
  Vec3 cell_centroid(Index c) const;
  /// Longest edge length of cell `c`.
  double cell_diameter(Index c) const;
  double total_volume() const;

private:
  std::vector<Vec3> vertices_;
  std::vector<Cell> cells_;
  std::vector<int> markers_;
};

/// Oriented boundary triangles of a TetMesh. Triangle normals point out of the
/// enclosed volume. `parent_facet` is the local index of the cell vertex
/// opposite to the facet.
struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<Index> parent_cell;
  std::vector<int> parent_facet;

  std::size_t num_triangles() const noexcept { return triangles.size(); }
  TriPoints triangle_points(Index t) const;
  /// Unit normal from the stored vertex order.
  Vec3 triangle_normal(Index t) const;
  double triangle_area(Index t) const;
  double total_area() const;
};

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);
double tet_volume(const TetPoints& t);

/// Structured mesh of the unit cube with n cells per axis.
TetMesh unit_cube_mesh(int n);
/// Structured mesh of the box [lo, hi] with n[i] cells along axis i. Every
/// sub-cube is split into 6 tetrahedra around its main diagonal (Kuhn split).
TetMesh box_mesh(const Vec3& lo, const Vec3& hi, std::array<int, 3> n);

/// Maps every vertex x to rotation * x + translation. The rotation must be
/// proper orthogonal.
TetMesh transform(const TetMesh& mesh, const Mat3& rotation, const Vec3& translation);

/// Keeps the cells whose centroid satisfies `keep` and renumbers vertices.
TetMesh extract_submesh(const TetMesh& mesh, const std::function<bool(const Vec3&)>& keep);

SurfaceMesh boundary(const TetMesh& mesh);

/// Number of surface edges that are not shared by exactly two triangles.
std::size_t count_open_edges(const SurfaceMesh& surface);
inline bool is_watertight(const SurfaceMesh& surface) { return count_open_edges(surface) == 0; }

/// Histogram check of facet incidence: returns the number of facets that are
/// shared by more than two cells (0 for a valid mesh).
std::size_t count_overshared_facets(const TetMesh& mesh);

/// Vertices lying on at least one boundary facet.
std::vector<bool> boundary_vertex_mask(const TetMesh& mesh);

// Text format:
//   tetmesh <num_vertices> <num_cells>
//   x y z            (num_vertices lines, 17 significant digits)
//   v0 v1 v2 v3      (num_cells lines, 0-based)
void write_mesh(const TetMesh& mesh, std::ostream& out);
void write_mesh(const TetMesh& mesh, const std::filesystem::path& path);
TetMesh read_mesh(std::istream& in);
TetMesh read_mesh(const std::filesystem::path& path);

}  // namespace olm
