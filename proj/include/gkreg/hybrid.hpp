#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gkreg/bidiag.hpp"
#include "gkreg/krylov.hpp"
#include "gkreg/problems.hpp"

namespace gkreg {

// Matrix-free L (I - Q_k Q_k^T) built from the leading k columns of the
// factorization's right basis. Holds a reference to the basis: the
// factorization must outlive the operator and must not be extended while the
// operator is in use. Each apply costs one L application plus one
// coefficient/update pair against Q; k = 0 degenerates to L itself.
class DeflatedOperator final : public LinearOperator {
 public:
  using LinearOperator::apply;
  using LinearOperator::apply_transpose;
  DeflatedOperator(std::shared_ptr<const LinearOperator> l, const BidiagFactorization& f,
                   std::size_t k);

  std::size_t rows() const override { return l_->rows(); }
  std::size_t cols() const override { return l_->cols(); }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_transpose(std::span<const double> x, std::span<double> y) const override;
  std::size_t deflation_rank() const { return k_; }

 private:
  std::shared_ptr<const LinearOperator> l_;
  const ColumnBasis* q_;
  std::size_t k_;
};

struct HybridStep {
  Vec x_k;    // LSMR iterate
  Vec z_k;    // inner correction
  Vec x_lk;   // x_k - z_k
  LsqrReport inner;
};

// One outer index k: forms x_k from the projected problem, solves
// min || L (I - Q_k Q_k^T) z - L x_k || by LSQR, returns x_k - z_k.
HybridStep hybrid_step(const BidiagFactorization& f, std::shared_ptr<const LinearOperator> l,
                       std::size_t k, LsqrOptions inner = {});

struct HybridRecord {
  std::size_t k = 0;
  Vec x_lk;
  double relative_error = 0.0;  // NaN when x_true is unknown
  double residual_norm = 0.0;   // ||A x_lk - b||
  std::size_t inner_iterations = 0;
  LsqrStop inner_stop = LsqrStop::converged;
  double cumulative_elapsed_ms = 0.0;
};

struct HybridRun {
  std::vector<HybridRecord> records;
  std::string problem;
  double tol = 0.0;
  bool reorthogonalized = true;
  std::uint64_t seed = 0;
  double noise_norm = 0.0;  // ||b - b_true||, available for generated problems
  std::optional<std::size_t> breakdown_at;
  double total_elapsed_ms = 0.0;
};

// Full solver sweep k = 1..k_max (stopping early at the Krylov grade).
// reorthogonalize defaults to on for n <= 1e4.
HybridRun hyb_lsmr(const ProblemInstance& p, std::size_t k_max, LsqrOptions inner = {},
                   std::optional<bool> reorthogonalize = {});

// Smallest k attaining the minimum recorded relative error. Requires x_true.
std::size_t select_best_k(const HybridRun& run);

struct DiscrepancySelection {
  std::size_t k = 0;
  bool crossed = false;  // false: no k satisfied the test, k is the last index
};

// First k with ||A x_lk - b|| <= tau * noise_norm.
DiscrepancySelection select_k_discrepancy(const HybridRun& run, double noise_norm,
                                          double tau = 1.01);

}  // namespace gkreg
