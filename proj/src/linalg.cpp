#include "overlapmesh/linalg.hpp"

#include "overlapmesh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <iomanip>

namespace olm {

SparseMatrix::SparseMatrix(std::size_t dim) : row_ptr_(dim + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(std::size_t dim, std::span<const Triplet> triplets) {
  const auto n = static_cast<Index>(dim);
  std::vector<std::size_t> count(dim + 1, 0);
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
      throw InvalidArgument("build_from_triplets: index out of range");
    ++count[static_cast<std::size_t>(t.row) + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());

  // Bucket by row, then sort and merge each row.
  std::vector<std::pair<Index, double>> entries(triplets.size());
  std::vector<std::size_t> fill(count.begin(), count.end() - 1);
  for (const auto& t : triplets) entries[fill[static_cast<std::size_t>(t.row)]++] = {t.col, t.value};

  SparseMatrix m(dim);
  m.cols_.reserve(triplets.size());
  m.vals_.reserve(triplets.size());
  for (std::size_t i = 0; i < dim; ++i) {
    auto first = entries.begin() + static_cast<std::ptrdiff_t>(count[i]);
    auto last = entries.begin() + static_cast<std::ptrdiff_t>(count[i + 1]);
    std::sort(first, last, [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto it = first; it != last; ++it) {
      if (m.cols_.size() > m.row_ptr_[i] && m.cols_.back() == it->first)
        m.vals_.back() += it->second;
      else {
        m.cols_.push_back(it->first);
        m.vals_.push_back(it->second);
      }
    }
    m.row_ptr_[i + 1] = m.cols_.size();
  }
  return m;
}

double SparseMatrix::coeff(std::size_t i, std::size_t j) const {
  const auto cols = row_cols(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<Index>(j));
  if (it == cols.end() || *it != static_cast<Index>(j)) return 0.0;
  return vals_[row_ptr_[i] + static_cast<std::size_t>(it - cols.begin())];
}

double* SparseMatrix::find(std::size_t i, std::size_t j) {
  const auto cols = row_cols(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<Index>(j));
  if (it == cols.end() || *it != static_cast<Index>(j)) return nullptr;
  return &vals_[row_ptr_[i] + static_cast<std::size_t>(it - cols.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = dim();
  if (x.size() != n || y.size() != n) throw InvalidArgument("SparseMatrix::multiply: size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      s += vals_[k] * x[static_cast<std::size_t>(cols_[k])];
    y[i] = s;
  }
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(dim());
  multiply(x, y);
  return y;
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(dim(), 0.0);
  for (std::size_t i = 0; i < dim(); ++i) d[i] = coeff(i, i);
  return d;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : vals_) m = std::max(m, std::abs(v));
  return m;
}

double SparseMatrix::symmetry_defect() const {
  double m = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) {
    const auto cols = row_cols(i);
    const auto vals = row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k)
      m = std::max(m, std::abs(vals[k] - coeff(static_cast<std::size_t>(cols[k]), i)));
  }
  return m;
}

void SparseMatrix::write_coordinate(std::ostream& out) const {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < dim(); ++i) {
    const auto cols = row_cols(i);
    const auto vals = row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) out << i << ' ' << cols[k] << ' ' << vals[k] << '\n';
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

SolveReport cg_solve(const SparseMatrix& a, std::span<const double> b, std::vector<double>& x,
                     const CgOptions& options) {
  const std::size_t n = a.dim();
  if (b.size() != n) throw InvalidArgument("cg_solve: right-hand side size mismatch");
  if (x.size() != n) x.assign(n, 0.0);
  const int max_iter = options.max_iter < 0 ? static_cast<int>(10 * n) : options.max_iter;

  std::vector<double> inv_diag(n, 1.0);
  if (options.preconditioner == Preconditioner::jacobi) {
    const auto d = a.diagonal();
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i] == 0.0) throw InvalidArgument("cg_solve: zero diagonal entry " + std::to_string(i));
      inv_diag[i] = 1.0 / d[i];
    }
  }

  SolveReport report;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    report.converged = true;
    return report;
  }

  std::vector<double> r(n), z(n), p(n), ap(n);
  a.multiply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  double rnorm = norm2(r);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);

  int it = 0;
  while (rnorm > options.tol * bnorm && it < max_iter) {
    a.multiply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) throw IndefiniteMatrix("cg_solve: breakdown, p^T A p <= 0");
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rnorm = norm2(r);
    ++it;
  }

  // Report the true residual rather than the recurrence.
  a.multiply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  report.iterations = it;
  report.relative_residual = norm2(r) / bnorm;
  report.converged = report.relative_residual <= options.tol;
  return report;
}

}  // namespace olm
