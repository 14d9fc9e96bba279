#pragma once

#include "overlapmesh/types.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace olm {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Square matrix in compressed row storage with sorted, unique columns per
/// row. Symmetric matrices store both triangles explicitly.
class SparseMatrix {
public:
  SparseMatrix() = default;
  explicit SparseMatrix(std::size_t dim);

  /// Sums duplicate entries. Throws InvalidArgument on out-of-range indices.
  static SparseMatrix from_triplets(std::size_t dim, std::span<const Triplet> triplets);

  std::size_t dim() const noexcept { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t nnz() const noexcept { return cols_.size(); }

  std::span<const Index> row_cols(std::size_t i) const {
    return {cols_.data() + row_ptr_[i], cols_.data() + row_ptr_[i + 1]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {vals_.data() + row_ptr_[i], vals_.data() + row_ptr_[i + 1]};
  }
  std::span<double> row_values(std::size_t i) {
    return {vals_.data() + row_ptr_[i], vals_.data() + row_ptr_[i + 1]};
  }

  /// Stored value at (i, j), 0 when structurally absent.
  double coeff(std::size_t i, std::size_t j) const;
  /// Pointer to the stored value at (i, j) or nullptr.
  double* find(std::size_t i, std::size_t j);

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;

  std::vector<double> diagonal() const;
  double max_abs() const;
  /// max |a_ij - a_ji| over stored entries.
  double symmetry_defect() const;

  /// "row col value" per stored entry, 0-based.
  void write_coordinate(std::ostream& out) const;

private:
  std::vector<std::size_t> row_ptr_;
  std::vector<Index> cols_;
  std::vector<double> vals_;
};

inline SparseMatrix build_from_triplets(std::size_t dim, std::span<const Triplet> triplets) {
  return SparseMatrix::from_triplets(dim, triplets);
}

enum class Preconditioner { none, jacobi };

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

struct CgOptions {
  double tol = 1e-10;
  /// Negative means 10 * dim.
  int max_iter = -1;
  Preconditioner preconditioner = Preconditioner::jacobi;
};

/// Preconditioned conjugate gradients. `x` holds the initial guess on entry
/// (resized to zeros if its size does not match) and the iterate on exit.
/// Stops when ||b - A x|| <= tol * ||b||.
SolveReport cg_solve(const SparseMatrix& a, std::span<const double> b, std::vector<double>& x,
                     const CgOptions& options = {});

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace olm
