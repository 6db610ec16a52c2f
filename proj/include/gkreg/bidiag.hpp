#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>

#include "gkreg/basis.hpp"
#include "gkreg/dense.hpp"
#include "gkreg/operator.hpp"

namespace gkreg {

struct BidiagOptions {
  bool reorthogonalize = true;
  // A new alpha or beta at or below breakdown_rel_tol times the largest
  // coefficient seen so far terminates the recurrence.
  double breakdown_rel_tol = 1e-14;
  std::size_t max_steps = 300;
};

// Golub-Kahan bidiagonalization of A started from b. After step k the state
// holds Q (n x k), P (m x k), alpha_1..alpha_k and beta_1..beta_k; the
// identity A Q_k = P_k+1 B_k needs beta_k+1 and p_k+1 from step k+1, so
// consumers extend through k+1 (a breakdown at or before k closes it with a
// zero coupling). Indices in the accessors are 1-based to match the
// recurrence.
class BidiagFactorization {
 public:
  BidiagFactorization(std::shared_ptr<const LinearOperator> a, std::span<const double> b,
                      BidiagOptions opts = {});

  // Advances `count` further steps; stops early at breakdown. Throws if the
  // recurrence already broke down or the step cap would be exceeded.
  void extend(std::size_t count);
  // Extends as needed so that steps() >= k, stopping quietly at breakdown.
  void ensure(std::size_t k);

  std::size_t steps() const { return alphas_.size(); }  // completed alpha count
  std::size_t beta_count() const { return betas_.size(); }
  double alpha(std::size_t j) const { return alphas_.at(j - 1); }
  double beta(std::size_t j) const { return betas_.at(j - 1); }
  // alpha_j<=steps as stored, 0 past a breakdown.
  double alpha_or_zero(std::size_t j) const { return j <= steps() ? alphas_[j - 1] : 0.0; }
  double beta_or_zero(std::size_t j) const { return j <= beta_count() ? betas_[j - 1] : 0.0; }

  const ColumnBasis& q_basis() const { return q_; }
  const ColumnBasis& p_basis() const { return p_; }
  const LinearOperator& op() const { return *a_; }
  std::shared_ptr<const LinearOperator> op_ptr() const { return a_; }

  std::optional<std::size_t> breakdown_at() const { return breakdown_at_; }
  bool reorthogonalized() const { return opts_.reorthogonalize; }
  // Largest alpha or beta seen; serves as a cheap ||A|| scale.
  double norm_estimate() const { return norm_estimate_; }

 private:
  void half_step_beta();   // beta_{j+1}, p_{j+1} for j = steps()
  void half_step_alpha();  // alpha_{j+1}, q_{j+1}
  bool below_breakdown(double v) const;

  std::shared_ptr<const LinearOperator> a_;
  BidiagOptions opts_;
  ColumnBasis q_;
  ColumnBasis p_;
  Vec alphas_, betas_;
  std::optional<std::size_t> breakdown_at_;
  double norm_estimate_ = 0.0;
};

BidiagFactorization bidiag_init(std::shared_ptr<const LinearOperator> a,
                                std::span<const double> b, BidiagOptions opts = {});

// The (k+1) x k projected matrix [B_k^T B_k; alpha_k+1 beta_k+1 e_k^T]:
// tridiagonal on top, one extra coupling row below. Requires the
// factorization valid through step k+1, or a breakdown at or before k
// (then the coupling row is zero).
DenseMatrix projected_normal_matrix(const BidiagFactorization& f, std::size_t k);

}  // namespace gkreg
