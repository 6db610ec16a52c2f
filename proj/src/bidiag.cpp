#include "gkreg/bidiag.hpp"

#include <cmath>
#include <stdexcept>

namespace gkreg {

BidiagFactorization::BidiagFactorization(std::shared_ptr<const LinearOperator> a,
                                         std::span<const double> b, BidiagOptions opts)
    : a_(std::move(a)), opts_(opts), q_(a_->cols()), p_(a_->rows()) {
  if (b.size() != a_->rows()) throw std::invalid_argument("bidiag: rhs size mismatch");
  const double beta1 = kernels::nrm2(b);
  if (beta1 == 0.0) throw std::invalid_argument("bidiag: zero right-hand side");
  betas_.push_back(beta1);
  norm_estimate_ = beta1;
  Vec p1(b.begin(), b.end());
  kernels::scal(1.0 / beta1, p1);
  p_.append(p1);
  half_step_alpha();
}

bool BidiagFactorization::below_breakdown(double v) const {
  return v <= opts_.breakdown_rel_tol * std::max(norm_estimate_, v);
}

void BidiagFactorization::half_step_alpha() {
  // r = A^T p_{j+1} - beta_{j+1} q_j, then alpha_{j+1} = ||r||.
  const std::size_t j = alphas_.size();
  Vec r = a_->apply_transpose(p_.col(j));
  if (j > 0) kernels::axpy(-betas_[j], q_.col(j - 1), r);
  if (opts_.reorthogonalize) q_.orthogonalize(r);
  const double alpha = kernels::nrm2(r);
  if (below_breakdown(alpha)) {
    breakdown_at_ = j;
    return;
  }
  norm_estimate_ = std::max(norm_estimate_, alpha);
  alphas_.push_back(alpha);
  kernels::scal(1.0 / alpha, r);
  q_.append(r);
}

void BidiagFactorization::half_step_beta() {
  // s = A q_j - alpha_j p_j, then beta_{j+1} = ||s||.
  const std::size_t j = alphas_.size();
  Vec s = a_->apply(q_.col(j - 1));
  kernels::axpy(-alphas_[j - 1], p_.col(j - 1), s);
  if (opts_.reorthogonalize) p_.orthogonalize(s);
  const double beta = kernels::nrm2(s);
  if (below_breakdown(beta)) {
    breakdown_at_ = j;
    return;
  }
  norm_estimate_ = std::max(norm_estimate_, beta);
  betas_.push_back(beta);
  kernels::scal(1.0 / beta, s);
  p_.append(s);
}

void BidiagFactorization::extend(std::size_t count) {
  if (breakdown_at_)
    throw std::logic_error("bidiag: extension past breakdown");
  const std::size_t target = alphas_.size() + count;
  // One step of headroom past max_steps so the coupling row of the projected
  // matrix at k = max_steps stays available.
  if (target > opts_.max_steps + 1)
    throw std::invalid_argument("bidiag: step cap exceeded");
  while (alphas_.size() < target && !breakdown_at_) {
    half_step_beta();
    if (breakdown_at_) return;
    half_step_alpha();
  }
}

void BidiagFactorization::ensure(std::size_t k) {
  if (breakdown_at_ || alphas_.size() >= k) return;
  if (k > opts_.max_steps + 1) throw std::invalid_argument("bidiag: step cap exceeded");
  while (alphas_.size() < k && !breakdown_at_) {
    half_step_beta();
    if (breakdown_at_) return;
    half_step_alpha();
  }
}

BidiagFactorization bidiag_init(std::shared_ptr<const LinearOperator> a,
                                std::span<const double> b, BidiagOptions opts) {
  return BidiagFactorization(std::move(a), b, opts);
}

DenseMatrix projected_normal_matrix(const BidiagFactorization& f, std::size_t k) {
  if (k == 0 || k > f.steps())
    throw std::out_of_range("projected_normal_matrix: k out of range");
  const bool closed = f.breakdown_at().has_value() && *f.breakdown_at() <= k;
  if (f.steps() < k + 1 && !closed)
    throw std::out_of_range("projected_normal_matrix: factorization not extended through k+1");

  DenseMatrix g(k + 1, k);
  for (std::size_t i = 1; i <= k; ++i) {
    const double ai = f.alpha(i);
    const double bnext = f.beta_or_zero(i + 1);
    g(i - 1, i - 1) = ai * ai + bnext * bnext;
    if (i < k) g(i - 1, i) = f.alpha(i + 1) * bnext;
    if (i > 1) g(i - 1, i - 2) = f.alpha(i) * f.beta(i);  // symmetric counterpart
  }
  g(k, k - 1) = f.alpha_or_zero(k + 1) * f.beta_or_zero(k + 1);
  return g;
}

}  // namespace gkreg
