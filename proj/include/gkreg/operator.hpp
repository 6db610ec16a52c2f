#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "gkreg/dense.hpp"

namespace gkreg {

// Matrix-free abstraction the factorization and solvers are written against.
// Implementations must be thread-safe for concurrent apply calls and
// deterministic: identical input spans give bitwise-identical output.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  // y = A x, x.size() == cols(), y.size() == rows().
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
  // y = A^T x, x.size() == rows(), y.size() == cols().
  virtual void apply_transpose(std::span<const double> x, std::span<double> y) const = 0;

  Vec apply(std::span<const double> x) const;
  Vec apply_transpose(std::span<const double> x) const;
};

// Materializes op column by column through unit-vector applies. Refuses
// anything bigger than max_entries; intended for oracles and small tests.
DenseMatrix to_dense(const LinearOperator& op, std::size_t max_entries = 10'000'000);

// General sparse matrix stored row-wise; every row keeps its entries with
// strictly increasing column indices. A transposed copy of the structure is
// built eagerly so A^T x runs row-wise too (no scattered writes, fixed
// accumulation order).
class SparseBandedMatrix {
 public:
  using RowEntries = std::vector<std::pair<std::size_t, double>>;

  SparseBandedMatrix(std::size_t rows, std::size_t cols, std::vector<RowEntries> row_data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const std::pair<std::size_t, double>> row(std::size_t i) const;
  std::span<const std::pair<std::size_t, double>> transposed_row(std::size_t j) const;

  void apply(std::span<const double> x, std::span<double> y) const;
  void apply_transpose(std::span<const double> x, std::span<double> y) const;

  // Image kernels, all on col-major panels X with `panel_cols` columns.
  // left:     Y = M X        (X: cols x p, Y: rows x p)
  // left_t:   Y = M^T X      (X: rows x p, Y: cols x p)
  // right_t:  Y = X M^T      (X: p x cols row-count p, col-major; Y: p x rows)
  // right:    Y = X M        (X: p x rows; Y: p x cols)
  void apply_left(const double* x, std::size_t panel_cols, double* y) const;
  void apply_left_t(const double* x, std::size_t panel_cols, double* y) const;
  void apply_right_t(const double* x, std::size_t panel_rows, double* y) const;
  void apply_right(const double* x, std::size_t panel_rows, double* y) const;

  DenseMatrix to_dense() const;

 private:
  struct Compressed {
    std::vector<std::size_t> offsets;
    std::vector<std::pair<std::size_t, double>> entries;
  };
  std::size_t rows_, cols_;
  Compressed fwd_, tr_;
};

class DenseOperator final : public LinearOperator {
 public:
  using LinearOperator::apply;
  using LinearOperator::apply_transpose;
  explicit DenseOperator(DenseMatrix a);
  std::size_t rows() const override { return a_.rows(); }
  std::size_t cols() const override { return a_.cols(); }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_transpose(std::span<const double> x, std::span<double> y) const override;
  const DenseMatrix& matrix() const { return a_; }

 private:
  DenseMatrix a_;
  DenseMatrix at_;  // transpose kept so both directions are row-major gemv
};

class IdentityOperator final : public LinearOperator {
 public:
  using LinearOperator::apply;
  using LinearOperator::apply_transpose;
  explicit IdentityOperator(std::size_t n) : n_(n) {}
  std::size_t rows() const override { return n_; }
  std::size_t cols() const override { return n_; }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_transpose(std::span<const double> x, std::span<double> y) const override;

 private:
  std::size_t n_;
};

class BandedOperator final : public LinearOperator {
 public:
  using LinearOperator::apply;
  using LinearOperator::apply_transpose;
  explicit BandedOperator(SparseBandedMatrix m) : m_(std::move(m)) {}
  std::size_t rows() const override { return m_.rows(); }
  std::size_t cols() const override { return m_.cols(); }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_transpose(std::span<const double> x, std::span<double> y) const override;
  const SparseBandedMatrix& matrix() const { return m_; }

 private:
  SparseBandedMatrix m_;
};

// Stacked 2-D first-difference operator [I (x) D; D (x) I] for an
// side x side image (col-major vectorization), D the 1-D forward difference.
class KronStackOperator final : public LinearOperator {
 public:
  using LinearOperator::apply;
  using LinearOperator::apply_transpose;
  explicit KronStackOperator(std::size_t side);
  std::size_t rows() const override { return 2 * side_ * (side_ - 1); }
  std::size_t cols() const override { return side_ * side_; }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_transpose(std::span<const double> x, std::span<double> y) const override;
  std::size_t side() const { return side_; }
  const SparseBandedMatrix& factor() const { return d_; }

 private:
  std::size_t side_;
  SparseBandedMatrix d_;
};

// A = T (x) T acting as X -> T X T^T on col-major side x side images.
class KronProductOperator final : public LinearOperator {
 public:
  using LinearOperator::apply;
  using LinearOperator::apply_transpose;
  KronProductOperator(SparseBandedMatrix t, std::size_t side);
  std::size_t rows() const override { return side_ * side_; }
  std::size_t cols() const override { return side_ * side_; }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_transpose(std::span<const double> x, std::span<double> y) const override;
  std::size_t side() const { return side_; }
  const SparseBandedMatrix& factor() const { return t_; }

 private:
  SparseBandedMatrix t_;
  std::size_t side_;
};

std::shared_ptr<const DenseOperator> dense_operator(DenseMatrix a);
std::shared_ptr<const LinearOperator> identity_operator(std::size_t n);
// (n-1) x n forward difference: rows [.. 1 -1 ..]; requires n >= 2.
std::shared_ptr<const LinearOperator> first_derivative_operator(std::size_t n);
// 2-D stacked difference for side x side images; requires side >= 2.
std::shared_ptr<const LinearOperator> kron_stack_operator(std::size_t side);

// The (n-1) x n forward-difference matrix as sparse storage.
SparseBandedMatrix first_difference_matrix(std::size_t n);

}  // namespace gkreg
