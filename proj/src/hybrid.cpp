#include "gkreg/hybrid.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gkreg {

DeflatedOperator::DeflatedOperator(std::shared_ptr<const LinearOperator> l,
                                   const BidiagFactorization& f, std::size_t k)
    : l_(std::move(l)), q_(&f.q_basis()), k_(k) {
  if (l_->cols() != q_->dim())
    throw std::invalid_argument("DeflatedOperator: L column count must match the basis dimension");
  if (k > q_->size())
    throw std::out_of_range("DeflatedOperator: k exceeds the committed basis");
}

void DeflatedOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (k_ == 0) {
    l_->apply(x, y);
    return;
  }
  Vec t(x.begin(), x.end());
  Vec c(k_);
  q_->coeffs(t, c);
  q_->accumulate(c, -1.0, t);
  l_->apply(t, y);
}

void DeflatedOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
  l_->apply_transpose(x, y);
  if (k_ == 0) return;
  Vec c(k_);
  q_->coeffs(y, c);
  q_->accumulate(c, -1.0, y);
}

HybridStep hybrid_step(const BidiagFactorization& f, std::shared_ptr<const LinearOperator> l,
                       std::size_t k, LsqrOptions inner) {
  HybridStep out;
  out.x_k = lsmr_iterate(f, k);
  Vec rhs = l->apply(out.x_k);
  if (k == f.q_basis().dim()) {
    // Q_k spans the whole space: L (I - Q_k Q_k^T) is zero up to rounding
    // and the minimal-norm correction is exactly zero.
    out.inner.solution.assign(out.x_k.size(), 0.0);
    out.inner.residual_norm = kernels::nrm2(rhs);
    out.inner.normal_equation_test = true;
  } else {
    // Below this scale the deflated operator carries no information relative
    // to L; matches the dense oracle's pseudo-inverse truncation.
    const double xnorm = kernels::nrm2(out.x_k);
    if (xnorm > 0.0)
      inner.alpha_floor = std::max(inner.alpha_floor, 1e-12 * kernels::nrm2(rhs) / xnorm);
    DeflatedOperator deflated(std::move(l), f, k);
    out.inner = lsqr_solve(deflated, rhs, inner);
  }
  out.z_k = out.inner.solution;
  out.x_lk.resize(out.x_k.size());
  for (std::size_t i = 0; i < out.x_lk.size(); ++i) out.x_lk[i] = out.x_k[i] - out.z_k[i];
  return out;
}

HybridRun hyb_lsmr(const ProblemInstance& p, std::size_t k_max, LsqrOptions inner,
                   std::optional<bool> reorthogonalize) {
  if (k_max == 0) throw std::invalid_argument("hyb_lsmr: k_max must be positive");
  const std::size_t n = p.a->cols();
  if (k_max > std::min(p.a->rows(), n))
    throw std::invalid_argument("hyb_lsmr: k_max exceeds min(rows, cols)");

  HybridRun run;
  run.problem = p.name;
  run.tol = std::max(inner.tol, inner.tol_floor);
  run.reorthogonalized = reorthogonalize.value_or(n <= 10'000);
  run.seed = p.seed;
  if (p.b_true.size() == p.b.size()) {
    Vec noise(p.b.size());
    for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = p.b[i] - p.b_true[i];
    run.noise_norm = kernels::nrm2(noise);
  }

  BidiagOptions bopts;
  bopts.reorthogonalize = run.reorthogonalized;
  bopts.max_steps = std::max<std::size_t>(k_max + 1, 300);
  const auto t0 = std::chrono::steady_clock::now();
  BidiagFactorization f(p.a, p.b, bopts);

  Vec residual(p.a->rows());
  for (std::size_t k = 1; k <= k_max; ++k) {
    f.ensure(k + 1);
    if (f.steps() < k) break;  // grade reached before this index
    HybridStep step = hybrid_step(f, p.l, k, inner);

    HybridRecord rec;
    rec.k = k;
    rec.relative_error = p.has_x_true() ? relative_error(*p.l, step.x_lk, p.x_true)
                                        : std::numeric_limits<double>::quiet_NaN();
    p.a->apply(step.x_lk, residual);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= p.b[i];
    rec.residual_norm = kernels::nrm2(residual);
    rec.inner_iterations = step.inner.iterations;
    rec.inner_stop = step.inner.stop_reason;
    rec.x_lk = std::move(step.x_lk);
    rec.cumulative_elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    run.records.push_back(std::move(rec));
    if (f.breakdown_at()) break;
  }
  run.breakdown_at = f.breakdown_at();
  run.total_elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

std::size_t select_best_k(const HybridRun& run) {
  if (run.records.empty()) throw std::invalid_argument("select_best_k: empty run");
  std::size_t best = run.records.front().k;
  double best_err = run.records.front().relative_error;
  if (std::isnan(best_err)) throw std::invalid_argument("select_best_k: needs recorded errors");
  for (const auto& r : run.records) {
    if (r.relative_error < best_err) {
      best_err = r.relative_error;
      best = r.k;
    }
  }
  return best;
}

DiscrepancySelection select_k_discrepancy(const HybridRun& run, double noise_norm, double tau) {
  if (run.records.empty()) throw std::invalid_argument("select_k_discrepancy: empty run");
  if (noise_norm <= 0.0) throw std::invalid_argument("select_k_discrepancy: noise norm must be positive");
  if (tau < 1.0) throw std::invalid_argument("select_k_discrepancy: tau must be >= 1");
  for (const auto& r : run.records)
    if (r.residual_norm <= tau * noise_norm) return {r.k, true};
  return {run.records.back().k, false};
}

}  // namespace gkreg
