#include "gkreg/operator.hpp"

#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace gkreg {

Vec LinearOperator::apply(std::span<const double> x) const {
  Vec y(rows());
  apply(x, std::span<double>(y));
  return y;
}

Vec LinearOperator::apply_transpose(std::span<const double> x) const {
  Vec y(cols());
  apply_transpose(x, std::span<double>(y));
  return y;
}

DenseMatrix to_dense(const LinearOperator& op, std::size_t max_entries) {
  const std::size_t m = op.rows(), n = op.cols();
  if (n != 0 && m > max_entries / n)
    throw std::length_error("to_dense: operator exceeds materialization cap");
  DenseMatrix a(m, n);
  Vec e(n, 0.0), col(m);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e, col);
    e[j] = 0.0;
    for (std::size_t i = 0; i < m; ++i) a(i, j) = col[i];
  }
  return a;
}

SparseBandedMatrix::SparseBandedMatrix(std::size_t rows, std::size_t cols,
                                       std::vector<RowEntries> row_data)
    : rows_(rows), cols_(cols) {
  if (row_data.size() != rows)
    throw std::invalid_argument("SparseBandedMatrix: row count mismatch");
  fwd_.offsets.assign(rows + 1, 0);
  for (std::size_t i = 0; i < rows; ++i) {
    std::size_t prev = cols;  // sentinel: first entry only checked against cols
    for (const auto& [c, v] : row_data[i]) {
      if (c >= cols) throw std::invalid_argument("SparseBandedMatrix: column index out of range");
      if (prev != cols && c <= prev)
        throw std::invalid_argument("SparseBandedMatrix: columns not strictly increasing");
      if (!std::isfinite(v)) throw std::invalid_argument("SparseBandedMatrix: non-finite entry");
      prev = c;
    }
    fwd_.offsets[i + 1] = fwd_.offsets[i] + row_data[i].size();
  }
  fwd_.entries.reserve(fwd_.offsets[rows]);
  for (auto& r : row_data)
    for (auto& e : r) fwd_.entries.push_back(e);

  // Transposed structure, entries of column j listed in increasing row order.
  std::vector<std::size_t> count(cols + 1, 0);
  for (const auto& [c, v] : fwd_.entries) ++count[c + 1];
  tr_.offsets.assign(cols + 1, 0);
  for (std::size_t j = 0; j < cols; ++j) tr_.offsets[j + 1] = tr_.offsets[j] + count[j + 1];
  tr_.entries.resize(fwd_.entries.size());
  std::vector<std::size_t> cursor(tr_.offsets.begin(), tr_.offsets.end() - 1);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t e = fwd_.offsets[i]; e < fwd_.offsets[i + 1]; ++e)
      tr_.entries[cursor[fwd_.entries[e].first]++] = {i, fwd_.entries[e].second};
}

std::span<const std::pair<std::size_t, double>> SparseBandedMatrix::row(std::size_t i) const {
  assert(i < rows_);
  return {fwd_.entries.data() + fwd_.offsets[i], fwd_.offsets[i + 1] - fwd_.offsets[i]};
}

std::span<const std::pair<std::size_t, double>> SparseBandedMatrix::transposed_row(
    std::size_t j) const {
  assert(j < cols_);
  return {tr_.entries.data() + tr_.offsets[j], tr_.offsets[j + 1] - tr_.offsets[j]};
}

namespace {

void compressed_apply(const std::vector<std::size_t>& offsets,
                      const std::vector<std::pair<std::size_t, double>>& entries,
                      std::size_t nrows, const double* x, double* y) {
#pragma omp parallel for schedule(static) if (entries.size() >= kernels::parallel_grain)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(nrows); ++i) {
    double s = 0.0;
    for (std::size_t e = offsets[static_cast<std::size_t>(i)];
         e < offsets[static_cast<std::size_t>(i) + 1]; ++e)
      s += entries[e].second * x[entries[e].first];
    y[static_cast<std::size_t>(i)] = s;
  }
}

}  // namespace

void SparseBandedMatrix::apply(std::span<const double> x, std::span<double> y) const {
  assert(x.size() == cols_ && y.size() == rows_);
  compressed_apply(fwd_.offsets, fwd_.entries, rows_, x.data(), y.data());
}

void SparseBandedMatrix::apply_transpose(std::span<const double> x, std::span<double> y) const {
  assert(x.size() == rows_ && y.size() == cols_);
  compressed_apply(tr_.offsets, tr_.entries, cols_, x.data(), y.data());
}

void SparseBandedMatrix::apply_left(const double* x, std::size_t panel_cols, double* y) const {
#pragma omp parallel for schedule(static) if (fwd_.entries.size() * panel_cols >= kernels::parallel_grain)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(panel_cols); ++c) {
    const double* xc = x + static_cast<std::size_t>(c) * cols_;
    double* yc = y + static_cast<std::size_t>(c) * rows_;
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (std::size_t e = fwd_.offsets[i]; e < fwd_.offsets[i + 1]; ++e)
        s += fwd_.entries[e].second * xc[fwd_.entries[e].first];
      yc[i] = s;
    }
  }
}

void SparseBandedMatrix::apply_left_t(const double* x, std::size_t panel_cols, double* y) const {
#pragma omp parallel for schedule(static) if (tr_.entries.size() * panel_cols >= kernels::parallel_grain)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(panel_cols); ++c) {
    const double* xc = x + static_cast<std::size_t>(c) * rows_;
    double* yc = y + static_cast<std::size_t>(c) * cols_;
    for (std::size_t j = 0; j < cols_; ++j) {
      double s = 0.0;
      for (std::size_t e = tr_.offsets[j]; e < tr_.offsets[j + 1]; ++e)
        s += tr_.entries[e].second * xc[tr_.entries[e].first];
      yc[j] = s;
    }
  }
}

void SparseBandedMatrix::apply_right_t(const double* x, std::size_t panel_rows, double* y) const {
#pragma omp parallel for schedule(static) if (fwd_.entries.size() * panel_rows >= kernels::parallel_grain)
  for (std::int64_t j = 0; j < static_cast<std::int64_t>(rows_); ++j) {
    double* yj = y + static_cast<std::size_t>(j) * panel_rows;
    for (std::size_t r = 0; r < panel_rows; ++r) yj[r] = 0.0;
    for (std::size_t e = fwd_.offsets[static_cast<std::size_t>(j)];
         e < fwd_.offsets[static_cast<std::size_t>(j) + 1]; ++e) {
      const double* xl = x + fwd_.entries[e].first * panel_rows;
      const double v = fwd_.entries[e].second;
      for (std::size_t r = 0; r < panel_rows; ++r) yj[r] += v * xl[r];
    }
  }
}

void SparseBandedMatrix::apply_right(const double* x, std::size_t panel_rows, double* y) const {
#pragma omp parallel for schedule(static) if (tr_.entries.size() * panel_rows >= kernels::parallel_grain)
  for (std::int64_t j = 0; j < static_cast<std::int64_t>(cols_); ++j) {
    double* yj = y + static_cast<std::size_t>(j) * panel_rows;
    for (std::size_t r = 0; r < panel_rows; ++r) yj[r] = 0.0;
    for (std::size_t e = tr_.offsets[static_cast<std::size_t>(j)];
         e < tr_.offsets[static_cast<std::size_t>(j) + 1]; ++e) {
      const double* xl = x + tr_.entries[e].first * panel_rows;
      const double v = tr_.entries[e].second;
      for (std::size_t r = 0; r < panel_rows; ++r) yj[r] += v * xl[r];
    }
  }
}

DenseMatrix SparseBandedMatrix::to_dense() const {
  DenseMatrix a(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (const auto& [c, v] : row(i)) a(i, c) = v;
  return a;
}

DenseOperator::DenseOperator(DenseMatrix a) : a_(std::move(a)) {
  for (double v : a_.values())
    if (!std::isfinite(v)) throw std::invalid_argument("DenseOperator: non-finite entry");
  at_ = a_.transposed();
}

void DenseOperator::apply(std::span<const double> x, std::span<double> y) const {
  kernels::gemv(a_.values(), a_.rows(), a_.cols(), x, y);
}

void DenseOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
  kernels::gemv(at_.values(), at_.rows(), at_.cols(), x, y);
}

void IdentityOperator::apply(std::span<const double> x, std::span<double> y) const {
  assert(x.size() == n_ && y.size() == n_);
  std::copy(x.begin(), x.end(), y.begin());
}

void IdentityOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
  apply(x, y);
}

void BandedOperator::apply(std::span<const double> x, std::span<double> y) const {
  m_.apply(x, y);
}

void BandedOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
  m_.apply_transpose(x, y);
}

SparseBandedMatrix first_difference_matrix(std::size_t n) {
  if (n < 2) throw std::invalid_argument("first_difference_matrix: n must be >= 2");
  std::vector<SparseBandedMatrix::RowEntries> rows(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) rows[i] = {{i, 1.0}, {i + 1, -1.0}};
  return {n - 1, n, std::move(rows)};
}

KronStackOperator::KronStackOperator(std::size_t side)
    : side_(side), d_(first_difference_matrix(side)) {}

void KronStackOperator::apply(std::span<const double> x, std::span<double> y) const {
  assert(x.size() == cols() && y.size() == rows());
  const std::size_t half = side_ * (side_ - 1);
  d_.apply_left(x.data(), side_, y.data());          // vec(D X)
  d_.apply_right_t(x.data(), side_, y.data() + half);  // vec(X D^T)
}

void KronStackOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
  assert(x.size() == rows() && y.size() == cols());
  const std::size_t half = side_ * (side_ - 1);
  d_.apply_left_t(x.data(), side_, y.data());  // vec(D^T U1)
  Vec tmp(cols());
  d_.apply_right(x.data() + half, side_, tmp.data());  // vec(U2 D)
  kernels::axpy(1.0, tmp, y);
}

KronProductOperator::KronProductOperator(SparseBandedMatrix t, std::size_t side)
    : t_(std::move(t)), side_(side) {
  if (t_.rows() != side || t_.cols() != side)
    throw std::invalid_argument("KronProductOperator: factor must be side x side");
}

void KronProductOperator::apply(std::span<const double> x, std::span<double> y) const {
  assert(x.size() == cols() && y.size() == rows());
  Vec w(side_ * side_);
  t_.apply_left(x.data(), side_, w.data());   // T X
  t_.apply_right_t(w.data(), side_, y.data());  // (T X) T^T
}

void KronProductOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
  assert(x.size() == rows() && y.size() == cols());
  Vec w(side_ * side_);
  t_.apply_left_t(x.data(), side_, w.data());  // T^T X
  t_.apply_right(w.data(), side_, y.data());   // (T^T X) T
}

std::shared_ptr<const DenseOperator> dense_operator(DenseMatrix a) {
  return std::make_shared<const DenseOperator>(std::move(a));
}

std::shared_ptr<const LinearOperator> identity_operator(std::size_t n) {
  return std::make_shared<const IdentityOperator>(n);
}

std::shared_ptr<const LinearOperator> first_derivative_operator(std::size_t n) {
  return std::make_shared<const BandedOperator>(first_difference_matrix(n));
}

std::shared_ptr<const LinearOperator> kron_stack_operator(std::size_t side) {
  if (side < 2) throw std::invalid_argument("kron_stack_operator: side must be >= 2");
  return std::make_shared<const KronStackOperator>(side);
}

}  // namespace gkreg
