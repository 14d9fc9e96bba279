#pragma once

#include "overlapmesh/mesh.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace olm::vtk {

/// Point data array: `components` is 1 (SCALARS) or 3 (VECTORS); `values` is
/// stored vertex-major.
struct PointArray {
  std::string name;
  int components = 1;
  std::vector<double> values;
};

struct CellArray {
  std::string name;
  std::vector<int> values;
};

/// Legacy-VTK ASCII unstructured grid with tetrahedral cells.
void write_unstructured_grid(std::ostream& out, const TetMesh& mesh,
                             const std::vector<PointArray>& point_data = {},
                             const std::vector<CellArray>& cell_data = {},
                             const std::string& title = "overlapmesh");
void write_unstructured_grid(const std::filesystem::path& path, const TetMesh& mesh,
                             const std::vector<PointArray>& point_data = {},
                             const std::vector<CellArray>& cell_data = {},
                             const std::string& title = "overlapmesh");

}  // namespace olm::vtk
