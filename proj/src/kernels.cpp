#include "gkreg/kernels.hpp"

#include <cassert>
#include <cmath>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gkreg::kernels {

namespace {

double chunk_dot(const double* x, const double* y, std::size_t lo, std::size_t hi) {
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += x[i] * y[i];
  return s;
}

}  // namespace

namespace serial {

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  const std::size_t n = x.size();
  if (n <= dot_chunk) return chunk_dot(x.data(), y.data(), 0, n);
  const std::size_t nchunks = (n + dot_chunk - 1) / dot_chunk;
  double total = 0.0;
  for (std::size_t c = 0; c < nchunks; ++c) {
    const std::size_t lo = c * dot_chunk;
    total += chunk_dot(x.data(), y.data(), lo, std::min(lo + dot_chunk, n));
  }
  return total;
}

double nrm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y) {
  assert(a.size() == rows * cols && x.size() == cols && y.size() == rows);
  for (std::size_t i = 0; i < rows; ++i)
    y[i] = chunk_dot(a.data() + i * cols, x.data(), 0, cols);
}

void basis_coeffs(const double* q, std::size_t dim, std::size_t k,
                  const double* v, double* c) {
  for (std::size_t j = 0; j < k; ++j)
    c[j] = chunk_dot(q + j * dim, v, 0, dim);
}

void basis_update(const double* q, std::size_t dim, std::size_t k,
                  const double* c, double sign, double* v) {
  for (std::size_t i = 0; i < dim; ++i) {
    double t = 0.0;
    for (std::size_t j = 0; j < k; ++j) t += q[i + j * dim] * c[j];
    v[i] += sign * t;
  }
}

}  // namespace serial

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  const std::size_t n = x.size();
  if (n <= dot_chunk) return chunk_dot(x.data(), y.data(), 0, n);
  const std::size_t nchunks = (n + dot_chunk - 1) / dot_chunk;
  std::vector<double> partial(nchunks);
  const auto* xp = x.data();
  const auto* yp = y.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(nchunks); ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * dot_chunk;
    partial[static_cast<std::size_t>(c)] = chunk_dot(xp, yp, lo, std::min(lo + dot_chunk, n));
  }
  double total = 0.0;
  for (std::size_t c = 0; c < nchunks; ++c) total += partial[c];
  return total;
}

double nrm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  const auto n = static_cast<std::int64_t>(x.size());
  const auto* xp = x.data();
  auto* yp = y.data();
#pragma omp parallel for schedule(static) if (n >= static_cast<std::int64_t>(parallel_grain))
  for (std::int64_t i = 0; i < n; ++i) yp[i] += a * xp[i];
}

void scal(double a, std::span<double> x) {
  const auto n = static_cast<std::int64_t>(x.size());
  auto* xp = x.data();
#pragma omp parallel for schedule(static) if (n >= static_cast<std::int64_t>(parallel_grain))
  for (std::int64_t i = 0; i < n; ++i) xp[i] *= a;
}

void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y) {
  assert(a.size() == rows * cols && x.size() == cols && y.size() == rows);
  const auto* ap = a.data();
  const auto* xp = x.data();
  auto* yp = y.data();
  const auto r = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static) if (rows * cols >= parallel_grain)
  for (std::int64_t i = 0; i < r; ++i)
    yp[i] = chunk_dot(ap + static_cast<std::size_t>(i) * cols, xp, 0, cols);
}

void basis_coeffs(const double* q, std::size_t dim, std::size_t k,
                  const double* v, double* c) {
  const auto kk = static_cast<std::int64_t>(k);
#pragma omp parallel for schedule(static) if (dim * k >= parallel_grain)
  for (std::int64_t j = 0; j < kk; ++j)
    c[j] = chunk_dot(q + static_cast<std::size_t>(j) * dim, v, 0, dim);
}

void basis_update(const double* q, std::size_t dim, std::size_t k,
                  const double* c, double sign, double* v) {
  const auto n = static_cast<std::int64_t>(dim);
#pragma omp parallel for schedule(static) if (dim * k >= parallel_grain)
  for (std::int64_t i = 0; i < n; ++i) {
    double t = 0.0;
    for (std::size_t j = 0; j < k; ++j) t += q[static_cast<std::size_t>(i) + j * dim] * c[j];
    v[static_cast<std::size_t>(i)] += sign * t;
  }
}

}  // namespace gkreg::kernels
