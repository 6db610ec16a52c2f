#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gkreg/kernels.hpp"

namespace gkreg {

// Column-major, append-only collection of dense vectors of a fixed dimension.
// Backs the Lanczos bases; the projection helpers run on the kernels module
// and inherit its determinism guarantees.
class ColumnBasis {
 public:
  explicit ColumnBasis(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return cols_; }
  const double* data() const { return data_.data(); }

  std::span<const double> col(std::size_t j) const;
  void append(std::span<const double> v);

  // c = Q^T v over the leading k columns (k <= size()).
  void coeffs(std::span<const double> v, std::span<double> c) const;
  // v += sign * Q c over the leading c.size() columns.
  void accumulate(std::span<const double> c, double sign, std::span<double> v) const;
  // Two-pass classical Gram-Schmidt: remove from v its components along all
  // stored columns. No-op when empty.
  void orthogonalize(std::span<double> v) const;

 private:
  std::size_t dim_;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace gkreg
