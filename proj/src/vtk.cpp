#include "overlapmesh/vtk.hpp"

#include "overlapmesh/errors.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>

namespace olm::vtk {

void write_unstructured_grid(std::ostream& out, const TetMesh& mesh,
                             const std::vector<PointArray>& point_data,
                             const std::vector<CellArray>& cell_data, const std::string& title) {
  const std::size_t nv = mesh.num_vertices();
  const std::size_t nc = mesh.num_cells();
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << std::setprecision(12);
  out << "POINTS " << nv << " double\n";
  for (const Vec3& x : mesh.vertices()) out << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
  out << "CELLS " << nc << ' ' << 5 * nc << '\n';
  for (const Cell& c : mesh.cells()) out << "4 " << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << '\n';
  out << "CELL_TYPES " << nc << '\n';
  for (std::size_t c = 0; c < nc; ++c) out << "10\n";  // VTK_TETRA

  if (!cell_data.empty()) {
    out << "CELL_DATA " << nc << '\n';
    for (const auto& a : cell_data) {
      if (a.values.size() != nc) throw InvalidArgument("vtk: cell array '" + a.name + "' has wrong size");
      out << "SCALARS " << a.name << " int 1\nLOOKUP_TABLE default\n";
      for (int v : a.values) out << v << '\n';
    }
  }
  if (!point_data.empty()) {
    out << "POINT_DATA " << nv << '\n';
    for (const auto& a : point_data) {
      if (a.components != 1 && a.components != 3)
        throw InvalidArgument("vtk: point array '" + a.name + "' must have 1 or 3 components");
      if (a.values.size() != nv * static_cast<std::size_t>(a.components))
        throw InvalidArgument("vtk: point array '" + a.name + "' has wrong size");
      if (a.components == 1) {
        out << "SCALARS " << a.name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : a.values) out << v << '\n';
      } else {
        out << "VECTORS " << a.name << " double\n";
        for (std::size_t i = 0; i < nv; ++i)
          out << a.values[3 * i] << ' ' << a.values[3 * i + 1] << ' ' << a.values[3 * i + 2] << '\n';
      }
    }
  }
}

void write_unstructured_grid(const std::filesystem::path& path, const TetMesh& mesh,
                             const std::vector<PointArray>& point_data,
                             const std::vector<CellArray>& cell_data, const std::string& title) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("vtk: cannot open " + path.string());
  write_unstructured_grid(out, mesh, point_data, cell_data, title);
}

}  // namespace olm::vtk
