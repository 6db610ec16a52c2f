#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "gkreg/dense.hpp"

namespace testutil {

// Uniform in [-1, 1), reproducible across platforms.
inline gkreg::Vec random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  gkreg::Vec v(n);
  for (auto& x : v) x = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
  return v;
}

inline gkreg::DenseMatrix random_dense(std::size_t rows, std::size_t cols,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  gkreg::DenseMatrix a(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      a(i, j) = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
  return a;
}

inline bool bitwise_equal(const gkreg::Vec& a, const gkreg::Vec& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

inline double max_abs_diff(const gkreg::Vec& a, const gkreg::Vec& b) {
  double m = a.size() == b.size() ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double vec_norm(const gkreg::Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// max |a - b| entrywise for dense matrices of equal shape.
inline double max_abs_diff(const gkreg::DenseMatrix& a, const gkreg::DenseMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

inline double deviation_from_identity(const gkreg::DenseMatrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      m = std::max(m, std::abs(a(i, j) - (i == j ? 1.0 : 0.0)));
  return m;
}

}  // namespace testutil
