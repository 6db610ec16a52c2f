#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gkreg/kernels.hpp"

namespace gkreg {

// Row-major dense matrix. Used by the small-scale oracle and the problem
// generators; the iterative path only ever sees it wrapped in an operator.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
  const double* data() const { return a_.data(); }
  double* data() { return a_.data(); }
  std::span<const double> values() const { return a_; }
  std::span<const double> row(std::size_t i) const { return {a_.data() + i * cols_, cols_}; }

  DenseMatrix transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;
};

Vec matvec(const DenseMatrix& a, std::span<const double> x);
Vec matvec_transpose(const DenseMatrix& a, std::span<const double> x);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
double max_abs(const DenseMatrix& a);

// Thin SVD a = u * diag(sigma) * v^T by one-sided Jacobi. Always returns
// cols() singular values in descending order; when rows < cols at least
// cols - rows of them are exact zeros and the matching u columns are zero.
struct SvdResult {
  DenseMatrix u;  // rows x cols
  Vec sigma;      // cols, descending, nonnegative
  DenseMatrix v;  // cols x cols
};

SvdResult jacobi_svd(const DenseMatrix& a, int max_sweeps = 60);
Vec singular_values(const DenseMatrix& a);

// Moore-Penrose pseudo-inverse with singular values at or below
// max(rel_cutoff * sigma_max, abs_cutoff) treated as zero. The absolute
// cutoff lets a caller anchor the truncation to an external scale when the
// whole matrix may be rounding noise.
DenseMatrix pseudo_inverse(const DenseMatrix& a, double rel_cutoff = 1e-12,
                           double abs_cutoff = 0.0);

// Least-squares solution of min ||a x - b|| by Householder QR. Requires
// rows >= cols and full column rank.
Vec qr_least_squares(DenseMatrix a, Vec b);

// Given k orthonormal columns (dim x k, column-major), returns dim x (dim-k)
// whose columns complete them to an orthonormal basis of R^dim.
DenseMatrix orthogonal_completion(const double* q, std::size_t dim, std::size_t k);

}  // namespace gkreg
