#pragma once

#include "overlapmesh/bvh.hpp"
#include "overlapmesh/geometry.hpp"
#include "overlapmesh/mesh.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace olm {

/// Both directions of one collision relation between background cells and
/// boundary facets of the overlapping mesh. Index lists are ascending.
struct CollisionMaps {
  std::vector<std::vector<Index>> cell_to_facets;
  std::vector<std::vector<Index>> facet_to_cells;
};

CollisionMaps make_collision_maps(const CollisionRelation& relation, std::size_t num_cells,
                                  std::size_t num_facets);

enum class CellClass : std::uint8_t { NotOverlapped, CompletelyOverlapped, PartiallyOverlapped };

const char* to_string(CellClass c);

/// Γ_kl: one boundary facet of the overlapping mesh clipped to one
/// background cell.
struct InterfaceFacetPart {
  Index facet = -1;   // triangle index in the overlapping mesh boundary
  Index cell_k = -1;  // overlapping-mesh cell owning the facet
  Index cell_l = -1;  // background cell
  PlanarPolygon polygon;
  double area = 0.0;
  Vec3 centroid = Vec3::Zero();
  /// Outward normal of the overlapping mesh boundary.
  Vec3 normal = Vec3::Zero();
};

struct CutCellGeometry {
  Index cell = -1;
  double visible_volume = 0.0;
  Vec3 visible_centroid = Vec3::Zero();
  double covered_volume = 0.0;
  /// visible_volume / |T| below small_cut_threshold; skipped in assembly.
  bool small = false;
};

inline constexpr double small_cut_threshold = 1e-15;

struct OverlapData {
  SurfaceMesh surface;        // boundary of the overlapping mesh
  AabbTree cell_tree;         // background cells
  AabbTree surface_tree;      // boundary triangles
  AabbTree overlap_cell_tree; // overlapping-mesh cells
  CollisionRelation relation; // (background cell, boundary triangle)
  CollisionMaps maps;
  std::vector<CellClass> cell_class;
  /// Ascending (cell_l, facet).
  std::vector<InterfaceFacetPart> facet_parts;
  /// Ascending cell.
  std::vector<CutCellGeometry> cut_cells;
  /// Background cell -> position in cut_cells, or -1.
  std::vector<Index> cut_cell_slot;

  const CutCellGeometry* cut_cell(Index c) const {
    const Index s = cut_cell_slot[static_cast<std::size_t>(c)];
    return s < 0 ? nullptr : &cut_cells[static_cast<std::size_t>(s)];
  }
};

/// Collision pairs between background cells and the boundary triangles via
/// simultaneous tree descent and the tolerant tet/triangle predicate.
CollisionRelation compute_collisions(const TetMesh& t0, const SurfaceMesh& surface,
                                     const AabbTree& cell_tree, const AabbTree& surface_tree,
                                     TraversalStats* stats = nullptr);

/// Cells in the relation are partially overlapped; the others are decided
/// by ray shooting from their centroid. Cells whose box misses the surface
/// box are not overlapped without shooting. The ray of cell c starts at
/// direction table entry ray_seed + c.
std::vector<CellClass> classify_cells(const TetMesh& t0, const CollisionRelation& relation,
                                      const SurfaceMesh& surface, const AabbTree& surface_tree,
                                      unsigned ray_seed = 0);

/// Clips every colliding boundary facet to each of its background cells.
/// A part is dropped when its polygon is degenerate, or when the whole
/// background cell lies behind the facet plane (a facet coplanar with a
/// background face then belongs only to the cell in front of it).
std::vector<InterfaceFacetPart> compute_interface_decomposition(const TetMesh& t0,
                                                                const SurfaceMesh& surface,
                                                                const CollisionMaps& maps);

/// Visible volume and centroid of every partially overlapped cell, from the
/// additive decomposition over overlapping-mesh cells.
std::vector<CutCellGeometry> compute_cut_cells(const TetMesh& t0, const TetMesh& t2,
                                               std::span<const CellClass> classes,
                                               const AabbTree& overlap_cell_tree);

/// Wall-clock seconds per phase of build_overlap.
struct OverlapTimings {
  double tree_build = 0.0;
  double collision = 0.0;
  double classification = 0.0;
  double interface_decomposition = 0.0;
  double cut_cells = 0.0;
};

/// Full pipeline. Throws InvalidArgument if the overlapping mesh boundary is
/// not watertight and EmptyMeshError for empty meshes.
OverlapData build_overlap(const TetMesh& t0, const TetMesh& t2, OverlapTimings* timings = nullptr,
                          unsigned ray_seed = 0);

inline std::span<const CutCellGeometry> iterate_cut_cells(const OverlapData& d) {
  return d.cut_cells;
}
inline std::span<const InterfaceFacetPart> iterate_facet_parts(const OverlapData& d) {
  return d.facet_parts;
}

struct OverlapSummary {
  std::size_t not_overlapped = 0;
  std::size_t completely_overlapped = 0;
  std::size_t partially_overlapped = 0;
  std::size_t small_cells = 0;
  std::size_t facet_parts = 0;
  double visible_volume = 0.0;
  double interface_area = 0.0;
};

/// Visible volume counts |T| for not overlapped cells and the computed
/// visible part for cut cells.
OverlapSummary summarize(const TetMesh& t0, const OverlapData& data);

void write_summary_csv(std::ostream& out, const OverlapSummary& s, bool header = true);

}  // namespace olm
