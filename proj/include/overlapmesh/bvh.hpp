#pragma once

#include "overlapmesh/geometry.hpp"
#include "overlapmesh/mesh.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace olm {

/// Binary axis-aligned bounding box hierarchy with one entity per leaf.
///
/// Built top-down by splitting at the median of the entity box centroids
/// along the longest axis of the centroid bounding box. Every leaf box is
/// enlarged by eps_geom times its own diameter so that contacts accepted by
/// the tolerant predicates are never pruned.
class AabbTree {
public:
  struct Node {
    Aabb box;
    std::int32_t left = -1;
    std::int32_t right = -1;
    Index entity = -1;

    bool is_leaf() const { return entity >= 0; }
  };

  AabbTree() = default;
  explicit AabbTree(std::span<const Aabb> boxes);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& node(std::int32_t i) const { return nodes_[static_cast<std::size_t>(i)]; }
  static constexpr std::int32_t root() { return 0; }
  const Aabb& root_box() const { return nodes_.front().box; }
  bool empty() const noexcept { return nodes_.empty(); }
  std::size_t num_leaves() const noexcept { return num_leaves_; }

  /// Entities whose (enlarged) leaf box intersects `box`, ascending.
  std::vector<Index> query(const Aabb& box) const;

  /// Maximum node depth (root has depth 0).
  int depth() const;

  /// Number of nodes whose box does not contain both children's boxes
  /// (exact comparisons).
  std::size_t count_containment_violations() const;

private:
  std::int32_t build(std::span<std::int64_t> ids, std::span<const Aabb> boxes,
                     const std::vector<Vec3>& centroids);

  std::vector<Node> nodes_;
  std::size_t num_leaves_ = 0;
};

AabbTree build_tree(std::span<const Aabb> boxes);
AabbTree build_cell_tree(const TetMesh& mesh);
AabbTree build_triangle_tree(const SurfaceMesh& surface);

/// Sorted, duplicate-free (A entity, B entity) pairs.
using CollisionRelation = std::vector<std::pair<Index, Index>>;

struct TraversalStats {
  std::size_t node_pairs = 0;
  std::size_t leaf_tests = 0;
};

using LeafTest = std::function<bool(Index, Index)>;

/// Simultaneous descent of two hierarchies. Disjoint box pairs are pruned; at
/// leaf pairs `leaf_test` decides. Descends A when B is a leaf, or when A is
/// not a leaf and A's box volume is at least B's.
CollisionRelation traverse_pair(const AabbTree& a, const AabbTree& b, const LeafTest& leaf_test,
                                TraversalStats* stats = nullptr);

struct RayCrossings {
  int count = 0;
  bool degenerate = false;
};

/// Counts the surface triangles crossed by the ray origin + t * direction,
/// t > 0. Hits whose parameters agree within eps_geom are counted once and
/// flag the result as degenerate.
RayCrossings count_ray_crossings(const AabbTree& tree, const SurfaceMesh& surface,
                                 const Vec3& origin, const Vec3& direction);

/// Fixed table of well-spread unit directions used for ray shooting.
std::span<const Vec3> ray_directions();

/// Parity test against a watertight surface. On a degenerate crossing the
/// ray is re-shot along the next table direction (starting at `seed`), at
/// most 8 times; then DegenerateGeometry is thrown.
bool point_inside_surface(const AabbTree& tree, const SurfaceMesh& surface, const Vec3& point,
                          unsigned seed = 0);

/// Debug dump: boxes of every `level_stride`-th tree level as VTK line cells.
void write_tree_vtk(std::ostream& out, const AabbTree& tree, int level_stride = 4);

}  // namespace olm
