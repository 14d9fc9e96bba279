#include "overlapmesh/bvh.hpp"

#include "overlapmesh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

namespace olm {

AabbTree::AabbTree(std::span<const Aabb> boxes) {
  if (boxes.empty()) throw InvalidArgument("AabbTree: no boxes");
  std::vector<Aabb> padded;
  padded.reserve(boxes.size());
  std::vector<Vec3> centroids;
  centroids.reserve(boxes.size());
  for (const Aabb& b : boxes) {
    if (!b.valid()) throw InvalidArgument("AabbTree: invalid box");
    padded.push_back(enlarge(b, eps_geom * b.diameter()));
    centroids.push_back(b.center());
  }
  std::vector<std::int64_t> ids(boxes.size());
  std::iota(ids.begin(), ids.end(), 0);
  nodes_.reserve(2 * boxes.size() - 1);
  num_leaves_ = boxes.size();
  build(ids, padded, centroids);
}

std::int32_t AabbTree::build(std::span<std::int64_t> ids, std::span<const Aabb> boxes,
                             const std::vector<Vec3>& centroids) {
  const auto self = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  if (ids.size() == 1) {
    nodes_[static_cast<std::size_t>(self)].box = boxes[static_cast<std::size_t>(ids[0])];
    nodes_[static_cast<std::size_t>(self)].entity = ids[0];
    return self;
  }

  Aabb centroid_box;
  for (auto id : ids) centroid_box.expand(centroids[static_cast<std::size_t>(id)]);
  int axis = 0;
  (centroid_box.max - centroid_box.min).maxCoeff(&axis);

  const std::size_t mid = ids.size() / 2;
  std::nth_element(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(mid), ids.end(),
                   [&](std::int64_t a, std::int64_t b) {
                     const double ca = centroids[static_cast<std::size_t>(a)][axis];
                     const double cb = centroids[static_cast<std::size_t>(b)][axis];
                     return ca < cb || (ca == cb && a < b);
                   });

  const std::int32_t left = build(ids.first(mid), boxes, centroids);
  const std::int32_t right = build(ids.subspan(mid), boxes, centroids);
  Node& n = nodes_[static_cast<std::size_t>(self)];
  n.left = left;
  n.right = right;
  n.box = nodes_[static_cast<std::size_t>(left)].box;
  n.box.expand(nodes_[static_cast<std::size_t>(right)].box);
  return self;
}

std::vector<Index> AabbTree::query(const Aabb& box) const {
  std::vector<Index> out;
  std::vector<std::int32_t> stack{root()};
  while (!stack.empty()) {
    const Node& n = node(stack.back());
    stack.pop_back();
    if (!n.box.intersects(box)) continue;
    if (n.is_leaf()) {
      out.push_back(n.entity);
    } else {
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

int AabbTree::depth() const {
  int best = 0;
  std::vector<std::pair<std::int32_t, int>> stack{{root(), 0}};
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    const Node& n = node(i);
    if (!n.is_leaf()) {
      stack.emplace_back(n.left, d + 1);
      stack.emplace_back(n.right, d + 1);
    }
  }
  return best;
}

std::size_t AabbTree::count_containment_violations() const {
  std::size_t bad = 0;
  for (const Node& n : nodes_) {
    if (n.is_leaf()) continue;
    if (!n.box.contains(node(n.left).box) || !n.box.contains(node(n.right).box)) ++bad;
  }
  return bad;
}

AabbTree build_tree(std::span<const Aabb> boxes) { return AabbTree(boxes); }

AabbTree build_cell_tree(const TetMesh& mesh) {
  std::vector<Aabb> boxes;
  boxes.reserve(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto p = mesh.cell_points(static_cast<Index>(c));
    boxes.push_back(bbox_of(p));
  }
  return AabbTree(boxes);
}

AabbTree build_triangle_tree(const SurfaceMesh& surface) {
  std::vector<Aabb> boxes;
  boxes.reserve(surface.num_triangles());
  for (std::size_t t = 0; t < surface.num_triangles(); ++t) {
    const auto p = surface.triangle_points(static_cast<Index>(t));
    boxes.push_back(bbox_of(p));
  }
  return AabbTree(boxes);
}

CollisionRelation traverse_pair(const AabbTree& a, const AabbTree& b, const LeafTest& leaf_test,
                                TraversalStats* stats) {
  CollisionRelation out;
  TraversalStats local;
  std::vector<std::pair<std::int32_t, std::int32_t>> stack{{AabbTree::root(), AabbTree::root()}};
  while (!stack.empty()) {
    const auto [ia, ib] = stack.back();
    stack.pop_back();
    ++local.node_pairs;
    const auto& na = a.node(ia);
    const auto& nb = b.node(ib);
    if (!na.box.intersects(nb.box)) continue;
    if (na.is_leaf() && nb.is_leaf()) {
      ++local.leaf_tests;
      if (leaf_test(na.entity, nb.entity)) out.emplace_back(na.entity, nb.entity);
    } else if (nb.is_leaf() || (!na.is_leaf() && na.box.volume() >= nb.box.volume())) {
      stack.emplace_back(na.right, ib);
      stack.emplace_back(na.left, ib);
    } else {
      stack.emplace_back(ia, nb.right);
      stack.emplace_back(ia, nb.left);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (stats) *stats = local;
  return out;
}

namespace {

// Slab test for t in [0, inf).
bool ray_hits_box(const Aabb& box, const Vec3& origin, const Vec3& direction) {
  double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (direction[i] == 0.0) {
      if (origin[i] < box.min[i] || origin[i] > box.max[i]) return false;
      continue;
    }
    const double inv = 1.0 / direction[i];
    double ta = (box.min[i] - origin[i]) * inv;
    double tb = (box.max[i] - origin[i]) * inv;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

std::vector<Vec3> make_direction_table() {
  // Spherical Fibonacci points; none of them is axis-aligned.
  constexpr int n = 64;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> dirs;
  dirs.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(1.0 - z * z);
    const double phi = golden * i + 0.1;
    dirs.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  // Interleave hemispheres so consecutive retries differ strongly.
  std::vector<Vec3> out;
  out.reserve(n);
  for (int i = 0; i < n / 2; ++i) {
    out.push_back(dirs[static_cast<std::size_t>(i * 2 + 1) % n]);
    out.push_back(dirs[static_cast<std::size_t>(n - 2 - i * 2 + n) % n]);
  }
  return out;
}

}  // namespace

std::span<const Vec3> ray_directions() {
  static const std::vector<Vec3> table = make_direction_table();
  return table;
}

RayCrossings count_ray_crossings(const AabbTree& tree, const SurfaceMesh& surface,
                                 const Vec3& origin, const Vec3& direction) {
  std::vector<RayHit> hits;
  std::vector<std::int32_t> stack{AabbTree::root()};
  while (!stack.empty()) {
    const auto& n = tree.node(stack.back());
    stack.pop_back();
    if (!ray_hits_box(n.box, origin, direction)) continue;
    if (n.is_leaf()) {
      if (auto h = ray_triangle_intersect(origin, direction, surface.triangle_points(n.entity)))
        hits.push_back(*h);
    } else {
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }

  RayCrossings out;
  if (hits.empty()) return out;
  std::sort(hits.begin(), hits.end(), [](const RayHit& a, const RayHit& b) { return a.t < b.t; });
  const double t_tol = eps_geom * tree.root_box().diameter() / direction.norm();
  double last = -std::numeric_limits<double>::infinity();
  for (const RayHit& h : hits) {
    out.degenerate |= h.degenerate;
    if (h.t - last <= t_tol) {
      out.degenerate = true;
      continue;
    }
    ++out.count;
    last = h.t;
  }
  return out;
}

bool point_inside_surface(const AabbTree& tree, const SurfaceMesh& surface, const Vec3& point,
                          unsigned seed) {
  if (!tree.root_box().contains(point)) return false;
  const auto dirs = ray_directions();
  constexpr int max_retries = 8;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    const Vec3& d = dirs[(seed + static_cast<unsigned>(attempt)) % dirs.size()];
    const RayCrossings c = count_ray_crossings(tree, surface, point, d);
    if (!c.degenerate) return c.count % 2 == 1;
  }
  throw DegenerateGeometry("point_inside_surface: ray classification stayed degenerate");
}

void write_tree_vtk(std::ostream& out, const AabbTree& tree, int level_stride) {
  if (level_stride < 1) throw InvalidArgument("write_tree_vtk: level_stride must be >= 1");
  std::vector<Aabb> boxes;
  std::vector<std::pair<std::int32_t, int>> stack{{AabbTree::root(), 0}};
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    const auto& n = tree.node(i);
    if (d % level_stride == 0) boxes.push_back(n.box);
    if (!n.is_leaf()) {
      stack.emplace_back(n.right, d + 1);
      stack.emplace_back(n.left, d + 1);
    }
  }
  out << "# vtk DataFile Version 3.0\naabb tree\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << 8 * boxes.size() << " double\n";
  for (const Aabb& b : boxes)
    for (int k = 0; k < 8; ++k)
      out << (k & 1 ? b.max[0] : b.min[0]) << ' ' << (k & 2 ? b.max[1] : b.min[1]) << ' '
          << (k & 4 ? b.max[2] : b.min[2]) << '\n';
  static constexpr int edges[12][2] = {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {0, 2}, {1, 3},
                                       {4, 6}, {5, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
  out << "CELLS " << 12 * boxes.size() << ' ' << 36 * boxes.size() << '\n';
  for (std::size_t b = 0; b < boxes.size(); ++b)
    for (const auto& e : edges) out << "2 " << 8 * b + e[0] << ' ' << 8 * b + e[1] << '\n';
  out << "CELL_TYPES " << 12 * boxes.size() << '\n';
  for (std::size_t i = 0; i < 12 * boxes.size(); ++i) out << "3\n";  // VTK_LINE
}

}  // namespace olm
