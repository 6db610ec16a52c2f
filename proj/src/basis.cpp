#include "gkreg/basis.hpp"

#include <cassert>
#include <stdexcept>

namespace gkreg {

std::span<const double> ColumnBasis::col(std::size_t j) const {
  if (j >= cols_) throw std::out_of_range("ColumnBasis::col: column index out of range");
  return {data_.data() + j * dim_, dim_};
}

void ColumnBasis::append(std::span<const double> v) {
  if (v.size() != dim_) throw std::invalid_argument("ColumnBasis::append: dimension mismatch");
  data_.insert(data_.end(), v.begin(), v.end());
  ++cols_;
}

void ColumnBasis::coeffs(std::span<const double> v, std::span<double> c) const {
  assert(v.size() == dim_ && c.size() <= cols_);
  kernels::basis_coeffs(data_.data(), dim_, c.size(), v.data(), c.data());
}

void ColumnBasis::accumulate(std::span<const double> c, double sign, std::span<double> v) const {
  assert(v.size() == dim_ && c.size() <= cols_);
  kernels::basis_update(data_.data(), dim_, c.size(), c.data(), sign, v.data());
}

void ColumnBasis::orthogonalize(std::span<double> v) const {
  if (cols_ == 0) return;
  std::vector<double> c(cols_);
  for (int pass = 0; pass < 2; ++pass) {
    coeffs(v, c);
    accumulate(c, -1.0, v);
  }
}

}  // namespace gkreg
