#include "overlapmesh/overlap.hpp"

#include "overlapmesh/errors.hpp"
#include "overlapmesh/quadrature.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <ostream>

namespace olm {

const char* to_string(CellClass c) {
  switch (c) {
    case CellClass::NotOverlapped: return "not_overlapped";
    case CellClass::CompletelyOverlapped: return "completely_overlapped";
    case CellClass::PartiallyOverlapped: return "partially_overlapped";
  }
  return "?";
}

CollisionMaps make_collision_maps(const CollisionRelation& relation, std::size_t num_cells,
                                  std::size_t num_facets) {
  CollisionMaps m;
  m.cell_to_facets.resize(num_cells);
  m.facet_to_cells.resize(num_facets);
  for (const auto& [c, f] : relation) {
    if (c < 0 || static_cast<std::size_t>(c) >= num_cells || f < 0 ||
        static_cast<std::size_t>(f) >= num_facets)
      throw InternalConsistency("make_collision_maps: index out of range");
    m.cell_to_facets[static_cast<std::size_t>(c)].push_back(f);
    m.facet_to_cells[static_cast<std::size_t>(f)].push_back(c);
  }
  for (auto& v : m.cell_to_facets) std::sort(v.begin(), v.end());
  for (auto& v : m.facet_to_cells) std::sort(v.begin(), v.end());
  return m;
}

CollisionRelation compute_collisions(const TetMesh& t0, const SurfaceMesh& surface,
                                     const AabbTree& cell_tree, const AabbTree& surface_tree,
                                     TraversalStats* stats) {
  return traverse_pair(
      cell_tree, surface_tree,
      [&](Index c, Index f) {
        return tet_triangle_intersects(t0.cell_points(c), surface.triangle_points(f));
      },
      stats);
}

std::vector<CellClass> classify_cells(const TetMesh& t0, const CollisionRelation& relation,
                                      const SurfaceMesh& surface, const AabbTree& surface_tree,
                                      unsigned ray_seed) {
  std::vector<CellClass> out(t0.num_cells(), CellClass::NotOverlapped);
  for (const auto& pair : relation) out[static_cast<std::size_t>(pair.first)] = CellClass::PartiallyOverlapped;
  const Aabb& surface_box = surface_tree.root_box();
  for (std::size_t c = 0; c < t0.num_cells(); ++c) {
    if (out[c] == CellClass::PartiallyOverlapped) continue;
    const auto pts = t0.cell_points(static_cast<Index>(c));
    if (!bbox_of(pts).intersects(surface_box)) continue;
    try {
      if (point_inside_surface(surface_tree, surface, t0.cell_centroid(static_cast<Index>(c)),
                               ray_seed + static_cast<unsigned>(c)))
        out[c] = CellClass::CompletelyOverlapped;
    } catch (const DegenerateGeometry& e) {
      throw DegenerateGeometry(std::string("classify_cells: cell ") + std::to_string(c) + ": " +
                                   e.what(),
                               {c});
    }
  }
  return out;
}

std::vector<InterfaceFacetPart> compute_interface_decomposition(const TetMesh& t0,
                                                                const SurfaceMesh& surface,
                                                                const CollisionMaps& maps) {
  std::vector<InterfaceFacetPart> parts;
  for (std::size_t f = 0; f < maps.facet_to_cells.size(); ++f) {
    const auto& cells = maps.facet_to_cells[f];
    if (cells.empty()) continue;
    const auto tri = surface.triangle_points(static_cast<Index>(f));
    const Vec3 n = surface.triangle_normal(static_cast<Index>(f));
    const double d = n.dot(tri[0]);
    for (const Index c : cells) {
      const auto tet = t0.cell_points(c);
      double scale = 0.0;
      for (const Vec3& p : tet) scale = std::max(scale, (p - tet[0]).norm());
      bool behind = true;
      for (const Vec3& p : tet) behind = behind && (n.dot(p) - d <= eps_geom * scale);
      if (behind) continue;

      PlanarPolygon poly = clip_triangle_tet(tri, tet);
      if (poly.empty()) continue;
      const PolygonMeasure m = polygon_area_centroid(poly);
      if (m.area <= 0.0) continue;
      InterfaceFacetPart part;
      part.facet = static_cast<Index>(f);
      part.cell_k = surface.parent_cell[f];
      part.cell_l = c;
      part.polygon = std::move(poly);
      part.area = m.area;
      part.centroid = m.centroid;
      part.normal = n;
      parts.push_back(std::move(part));
    }
  }
  std::sort(parts.begin(), parts.end(), [](const InterfaceFacetPart& a, const InterfaceFacetPart& b) {
    return a.cell_l < b.cell_l || (a.cell_l == b.cell_l && a.facet < b.facet);
  });
  return parts;
}

namespace {

// Projects x onto the tetrahedron by clamping its barycentric coordinates.
Vec3 clamp_to_tet(const TetPoints& tet, const Vec3& x) {
  Mat3 j;
  j.col(0) = tet[1] - tet[0];
  j.col(1) = tet[2] - tet[0];
  j.col(2) = tet[3] - tet[0];
  const Vec3 l = j.partialPivLu().solve(x - tet[0]);
  Eigen::Vector4d b(1.0 - l.sum(), l[0], l[1], l[2]);
  if ((b.array() >= 0.0).all()) return x;
  b = b.cwiseMax(0.0);
  b /= b.sum();
  return b[0] * tet[0] + b[1] * tet[1] + b[2] * tet[2] + b[3] * tet[3];
}

// True when some face plane of `a` has every vertex of `b` on or beyond it,
// so the two tetrahedra share no interior.
bool separated_by_face(const std::array<Plane, 4>& planes_a, const TetPoints& b, double tol) {
  for (const Plane& h : planes_a) {
    bool all_out = true;
    for (const Vec3& p : b) all_out = all_out && h.signed_distance(p) >= -tol;
    if (all_out) return true;
  }
  return false;
}

}  // namespace

std::vector<CutCellGeometry> compute_cut_cells(const TetMesh& t0, const TetMesh& t2,
                                               std::span<const CellClass> classes,
                                               const AabbTree& overlap_cell_tree) {
  std::vector<CutCellGeometry> out;
  for (std::size_t c = 0; c < t0.num_cells(); ++c) {
    if (classes[c] != CellClass::PartiallyOverlapped) continue;
    const auto tet = t0.cell_points(static_cast<Index>(c));
    const double vol = tet_volume(tet);
    const Vec3 first = vol * t0.cell_centroid(static_cast<Index>(c));

    const auto planes = tet_halfspaces(tet);
    const double tol = eps_geom * t0.cell_diameter(static_cast<Index>(c));
    double covered = 0.0;
    Vec3 covered_first = Vec3::Zero();
    for (const Index k : overlap_cell_tree.query(bbox_of(tet))) {
      const auto other = t2.cell_points(k);
      const auto other_planes = tet_halfspaces(other);
      if (separated_by_face(planes, other, tol) || separated_by_face(other_planes, tet, tol)) continue;
      const ConvexPolyhedron piece = tet_tet_intersection(tet, other_planes);
      if (piece.empty()) continue;
      const FirstMoments m = polyhedron_first_moments(piece);
      covered += m.volume;
      covered_first += m.first;
    }

    CutCellGeometry g;
    g.cell = static_cast<Index>(c);
    g.covered_volume = std::clamp(covered, 0.0, vol);
    g.visible_volume = vol - g.covered_volume;
    g.small = g.visible_volume / vol < small_cut_threshold;
    if (g.visible_volume > 0.0)
      g.visible_centroid = clamp_to_tet(tet, (first - covered_first) / g.visible_volume);
    else
      g.visible_centroid = t0.cell_centroid(static_cast<Index>(c));
    out.push_back(g);
  }
  return out;
}

OverlapData build_overlap(const TetMesh& t0, const TetMesh& t2, OverlapTimings* timings,
                          unsigned ray_seed) {
  using Clock = std::chrono::steady_clock;
  auto lap = [](Clock::time_point& t) {
    const auto now = Clock::now();
    const double s = std::chrono::duration<double>(now - t).count();
    t = now;
    return s;
  };
  if (t0.empty() || t2.empty()) throw EmptyMeshError("build_overlap: empty mesh");
  OverlapTimings tm;
  auto t = Clock::now();
  OverlapData d;
  d.surface = boundary(t2);
  if (!is_watertight(d.surface))
    throw InvalidArgument("build_overlap: overlapping mesh boundary is not watertight (" +
                          std::to_string(count_open_edges(d.surface)) + " open edges)");
  d.cell_tree = build_cell_tree(t0);
  d.surface_tree = build_triangle_tree(d.surface);
  d.overlap_cell_tree = build_cell_tree(t2);
  tm.tree_build = lap(t);
  d.relation = compute_collisions(t0, d.surface, d.cell_tree, d.surface_tree);
  d.maps = make_collision_maps(d.relation, t0.num_cells(), d.surface.num_triangles());
  tm.collision = lap(t);
  d.cell_class = classify_cells(t0, d.relation, d.surface, d.surface_tree, ray_seed);
  tm.classification = lap(t);
  d.facet_parts = compute_interface_decomposition(t0, d.surface, d.maps);
  tm.interface_decomposition = lap(t);
  d.cut_cells = compute_cut_cells(t0, t2, d.cell_class, d.overlap_cell_tree);
  d.cut_cell_slot.assign(t0.num_cells(), -1);
  for (std::size_t i = 0; i < d.cut_cells.size(); ++i)
    d.cut_cell_slot[static_cast<std::size_t>(d.cut_cells[i].cell)] = static_cast<Index>(i);
  tm.cut_cells = lap(t);
  if (timings) *timings = tm;
  return d;
}

OverlapSummary summarize(const TetMesh& t0, const OverlapData& data) {
  OverlapSummary s;
  for (std::size_t c = 0; c < t0.num_cells(); ++c) {
    switch (data.cell_class[c]) {
      case CellClass::NotOverlapped:
        ++s.not_overlapped;
        s.visible_volume += t0.cell_volume(static_cast<Index>(c));
        break;
      case CellClass::CompletelyOverlapped: ++s.completely_overlapped; break;
      case CellClass::PartiallyOverlapped: ++s.partially_overlapped; break;
    }
  }
  for (const auto& g : data.cut_cells) {
    s.visible_volume += g.visible_volume;
    if (g.small) ++s.small_cells;
  }
  for (const auto& p : data.facet_parts) s.interface_area += p.area;
  s.facet_parts = data.facet_parts.size();
  return s;
}

void write_summary_csv(std::ostream& out, const OverlapSummary& s, bool header) {
  if (header)
    out << "not_overlapped,completely_overlapped,partially_overlapped,small_cells,facet_parts,"
           "visible_volume,interface_area\n";
  out << s.not_overlapped << ',' << s.completely_overlapped << ',' << s.partially_overlapped << ','
      << s.small_cells << ',' << s.facet_parts << ',' << std::setprecision(17) << s.visible_volume
      << ',' << s.interface_area << '\n';
}

}  // namespace olm
