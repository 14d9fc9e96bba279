#include "overlapmesh/mesh.hpp"

#include "overlapmesh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <tuple>

namespace olm {

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

double tet_volume(const TetPoints& t) { return std::abs(signed_volume(t[0], t[1], t[2], t[3])); }

namespace {

double longest_edge(const TetPoints& p) {
  double l = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) l = std::max(l, (p[i] - p[j]).norm());
  return l;
}

}  // namespace

TetMesh::TetMesh(std::vector<Vec3> vertices, std::vector<Cell> cells, std::vector<int> markers)
    : vertices_(std::move(vertices)), cells_(std::move(cells)), markers_(std::move(markers)) {
  if (!markers_.empty() && markers_.size() != cells_.size())
    throw InvalidArgument("TetMesh: marker count does not match cell count");

  const auto nv = static_cast<Index>(vertices_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    auto& cell = cells_[c];
    for (int i = 0; i < 4; ++i) {
      if (cell[i] < 0 || cell[i] >= nv)
        throw InvalidArgument("TetMesh: cell " + std::to_string(c) + " references vertex " +
                              std::to_string(cell[i]) + " out of range");
      for (int j = 0; j < i; ++j)
        if (cell[i] == cell[j])
          throw InvalidArgument("TetMesh: cell " + std::to_string(c) + " repeats a vertex");
    }
    const TetPoints p = cell_points(static_cast<Index>(c));
    const double v = signed_volume(p[0], p[1], p[2], p[3]);
    const double l = longest_edge(p);
    if (!(std::abs(v) > 1e-14 * l * l * l))
      throw DegenerateGeometry("TetMesh: cell " + std::to_string(c) + " has zero volume", {c});
    if (v < 0) std::swap(cell[2], cell[3]);
  }
}

TetPoints TetMesh::cell_points(Index c) const {
  const Cell& cl = cell(c);
  return {vertex(cl[0]), vertex(cl[1]), vertex(cl[2]), vertex(cl[3])};
}

double TetMesh::cell_volume(Index c) const { return tet_volume(cell_points(c)); }

Vec3 TetMesh::cell_centroid(Index c) const {
  const TetPoints p = cell_points(c);
  return 0.25 * (p[0] + p[1] + p[2] + p[3]);
}

double TetMesh::cell_diameter(Index c) const { return longest_edge(cell_points(c)); }

double TetMesh::total_volume() const {
  double v = 0.0;
  for (std::size_t c = 0; c < cells_.size(); ++c) v += cell_volume(static_cast<Index>(c));
  return v;
}

TriPoints SurfaceMesh::triangle_points(Index t) const {
  const Triangle& tri = triangles[static_cast<std::size_t>(t)];
  return {vertices[static_cast<std::size_t>(tri[0])], vertices[static_cast<std::size_t>(tri[1])],
          vertices[static_cast<std::size_t>(tri[2])]};
}

Vec3 SurfaceMesh::triangle_normal(Index t) const {
  const TriPoints p = triangle_points(t);
  return (p[1] - p[0]).cross(p[2] - p[0]).normalized();
}

double SurfaceMesh::triangle_area(Index t) const {
  const TriPoints p = triangle_points(t);
  return 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
}

double SurfaceMesh::total_area() const {
  double a = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) a += triangle_area(static_cast<Index>(t));
  return a;
}

TetMesh box_mesh(const Vec3& lo, const Vec3& hi, std::array<int, 3> n) {
  for (int d = 0; d < 3; ++d) {
    if (n[d] < 1) throw InvalidArgument("box_mesh: cell counts must be >= 1");
    if (!(lo[d] < hi[d])) throw InvalidArgument("box_mesh: degenerate box");
  }
  const Index nx = n[0] + 1, ny = n[1] + 1, nz = n[2] + 1;
  auto coord = [&](int d, int i) {
    if (i == n[d]) return hi[d];
    return lo[d] + (hi[d] - lo[d]) * (static_cast<double>(i) / n[d]);
  };
  std::vector<Vec3> vertices;
  vertices.reserve(static_cast<std::size_t>(nx * ny * nz));
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) vertices.emplace_back(coord(0, i), coord(1, j), coord(2, k));

  auto id = [&](Index i, Index j, Index k) { return i + nx * (j + ny * k); };
  static constexpr std::array<std::array<int, 3>, 6> perms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

  std::vector<Cell> cells;
  cells.reserve(6 * static_cast<std::size_t>(n[0]) * n[1] * n[2]);
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i)
        for (const auto& p : perms) {
          std::array<Index, 3> ijk = {i, j, k};
          Cell cell;
          cell[0] = id(ijk[0], ijk[1], ijk[2]);
          for (int s = 0; s < 3; ++s) {
            ++ijk[p[s]];
            cell[s + 1] = id(ijk[0], ijk[1], ijk[2]);
          }
          cells.push_back(cell);
        }
  return TetMesh(std::move(vertices), std::move(cells));
}

TetMesh unit_cube_mesh(int n) {
  if (n < 1) throw InvalidArgument("unit_cube_mesh: n must be >= 1");
  return box_mesh(Vec3::Zero(), Vec3::Ones(), {n, n, n});
}

TetMesh transform(const TetMesh& mesh, const Mat3& rotation, const Vec3& translation) {
  const double orth = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (orth > 1e-12 || std::abs(rotation.determinant() - 1.0) > 1e-12)
    throw InvalidArgument("transform: rotation is not proper orthogonal");
  std::vector<Vec3> vertices;
  vertices.reserve(mesh.num_vertices());
  for (const Vec3& x : mesh.vertices()) vertices.push_back(rotation * x + translation);
  return TetMesh(std::move(vertices), mesh.cells(), mesh.markers());
}

TetMesh extract_submesh(const TetMesh& mesh, const std::function<bool(const Vec3&)>& keep) {
  std::vector<Index> renumber(mesh.num_vertices(), -1);
  std::vector<Vec3> vertices;
  std::vector<Cell> cells;
  std::vector<int> markers;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto ci = static_cast<Index>(c);
    if (!keep(mesh.cell_centroid(ci))) continue;
    Cell cell = mesh.cell(ci);
    for (auto& v : cell) {
      auto& r = renumber[static_cast<std::size_t>(v)];
      if (r < 0) {
        r = static_cast<Index>(vertices.size());
        vertices.push_back(mesh.vertex(v));
      }
      v = r;
    }
    cells.push_back(cell);
    if (!mesh.markers().empty()) markers.push_back(mesh.markers()[c]);
  }
  if (cells.empty()) throw EmptyMeshError("extract_submesh: no cell satisfies the predicate");
  return TetMesh(std::move(vertices), std::move(cells), std::move(markers));
}

namespace {

struct FacetRecord {
  std::array<Index, 3> key;
  Index cell;
  int local;
};

std::vector<FacetRecord> sorted_facets(const TetMesh& mesh) {
  std::vector<FacetRecord> facets;
  facets.reserve(4 * mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cell(static_cast<Index>(c));
    for (int f = 0; f < 4; ++f) {
      std::array<Index, 3> key;
      int m = 0;
      for (int i = 0; i < 4; ++i)
        if (i != f) key[m++] = cell[i];
      std::sort(key.begin(), key.end());
      facets.push_back({key, static_cast<Index>(c), f});
    }
  }
  std::sort(facets.begin(), facets.end(), [](const FacetRecord& a, const FacetRecord& b) {
    return std::tie(a.key, a.cell, a.local) < std::tie(b.key, b.cell, b.local);
  });
  return facets;
}

template <class Visitor>
void for_each_facet_run(const std::vector<FacetRecord>& facets, Visitor&& visit) {
  std::size_t i = 0;
  while (i < facets.size()) {
    std::size_t j = i + 1;
    while (j < facets.size() && facets[j].key == facets[i].key) ++j;
    visit(i, j - i);
    i = j;
  }
}

}  // namespace

SurfaceMesh boundary(const TetMesh& mesh) {
  SurfaceMesh surface;
  const auto facets = sorted_facets(mesh);
  std::vector<Index> renumber(mesh.num_vertices(), -1);
  auto local_vertex = [&](Index v) {
    auto& r = renumber[static_cast<std::size_t>(v)];
    if (r < 0) {
      r = static_cast<Index>(surface.vertices.size());
      surface.vertices.push_back(mesh.vertex(v));
    }
    return r;
  };

  std::vector<std::pair<Index, int>> exterior;
  for_each_facet_run(facets, [&](std::size_t first, std::size_t count) {
    if (count == 1) exterior.emplace_back(facets[first].cell, facets[first].local);
  });
  // Deterministic order: by parent cell, then local facet.
  std::sort(exterior.begin(), exterior.end());

  for (const auto& [c, f] : exterior) {
    const Cell& cell = mesh.cell(c);
    Triangle tri;
    int m = 0;
    for (int i = 0; i < 4; ++i)
      if (i != f) tri[m++] = cell[i];
    const Index opposite = cell[f];
    if (signed_volume(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]),
                      mesh.vertex(opposite)) > 0)
      std::swap(tri[1], tri[2]);
    for (auto& v : tri) v = local_vertex(v);
    surface.triangles.push_back(tri);
    surface.parent_cell.push_back(c);
    surface.parent_facet.push_back(f);
  }
  return surface;
}

std::size_t count_open_edges(const SurfaceMesh& surface) {
  std::map<std::pair<Index, Index>, int> edges;
  for (const auto& t : surface.triangles)
    for (int e = 0; e < 3; ++e) {
      Index a = t[e], b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edges[{a, b}];
    }
  std::size_t open = 0;
  for (const auto& [edge, count] : edges)
    if (count != 2) ++open;
  return open;
}

std::size_t count_overshared_facets(const TetMesh& mesh) {
  const auto facets = sorted_facets(mesh);
  std::size_t bad = 0;
  for_each_facet_run(facets, [&](std::size_t, std::size_t count) {
    if (count > 2) ++bad;
  });
  return bad;
}

std::vector<bool> boundary_vertex_mask(const TetMesh& mesh) {
  std::vector<bool> mask(mesh.num_vertices(), false);
  const auto facets = sorted_facets(mesh);
  for_each_facet_run(facets, [&](std::size_t first, std::size_t count) {
    if (count != 1) return;
    for (Index v : facets[first].key) mask[static_cast<std::size_t>(v)] = true;
  });
  return mask;
}

void write_mesh(const TetMesh& mesh, std::ostream& out) {
  out << "tetmesh " << mesh.num_vertices() << ' ' << mesh.num_cells() << '\n';
  out << std::setprecision(17);
  for (const Vec3& x : mesh.vertices()) out << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
  for (const Cell& c : mesh.cells()) out << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << '\n';
}

void write_mesh(const TetMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("write_mesh: cannot open " + path.string());
  write_mesh(mesh, out);
}

namespace {

// Reads the next non-empty line; returns false at end of input.
bool next_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

template <class T, std::size_t N>
std::array<T, N> parse_fields(const std::string& line, std::size_t lineno, const char* what) {
  std::istringstream ss(line);
  std::array<T, N> out;
  for (auto& v : out)
    if (!(ss >> v)) throw ParseError(lineno, std::string("expected ") + what);
  std::string extra;
  if (ss >> extra) throw ParseError(lineno, "trailing content '" + extra + "'");
  return out;
}

}  // namespace

TetMesh read_mesh(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!next_line(in, line, lineno)) throw ParseError(0, "empty input");
  std::istringstream header(line);
  std::string tag;
  long long nv = -1, nc = -1;
  if (!(header >> tag >> nv >> nc) || tag != "tetmesh" || nv < 0 || nc < 0)
    throw ParseError(lineno, "expected 'tetmesh <num_vertices> <num_cells>'");

  std::vector<Vec3> vertices;
  vertices.reserve(static_cast<std::size_t>(nv));
  for (long long i = 0; i < nv; ++i) {
    if (!next_line(in, line, lineno)) throw ParseError(0, "unexpected end of file in vertex block");
    const auto x = parse_fields<double, 3>(line, lineno, "three coordinates");
    vertices.emplace_back(x[0], x[1], x[2]);
  }
  std::vector<Cell> cells;
  std::vector<std::size_t> cell_lines;
  cells.reserve(static_cast<std::size_t>(nc));
  for (long long i = 0; i < nc; ++i) {
    if (!next_line(in, line, lineno)) throw ParseError(0, "unexpected end of file in cell block");
    const auto c = parse_fields<long long, 4>(line, lineno, "four vertex indices");
    Cell cell;
    for (int k = 0; k < 4; ++k) {
      if (c[k] < 0 || c[k] >= nv)
        throw ParseError(lineno, "vertex index " + std::to_string(c[k]) + " out of range");
      cell[k] = static_cast<Index>(c[k]);
    }
    cells.push_back(cell);
    cell_lines.push_back(lineno);
  }
  if (next_line(in, line, lineno)) throw ParseError(lineno, "unexpected content after cell block");
  try {
    return TetMesh(std::move(vertices), std::move(cells));
  } catch (const DegenerateGeometry& e) {
    const std::size_t bad = e.entities().empty() ? 0 : e.entities().front();
    throw ParseError(bad < cell_lines.size() ? cell_lines[bad] : 0, e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(0, e.what());
  }
}

TetMesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("read_mesh: cannot open " + path.string());
  return read_mesh(in);
}

}  // namespace olm
