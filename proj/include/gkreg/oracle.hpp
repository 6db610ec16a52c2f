#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gkreg/bidiag.hpp"
#include "gkreg/dense.hpp"

namespace gkreg {

// Everything here recomputes the hybrid quantities densely (explicit
// pseudo-inverses, full SVDs, materialized projectors) so the matrix-free
// path can be checked against an independent route. Capped at n <= 500.
inline constexpr std::size_t oracle_dim_cap = 500;

struct DenseHybridResult {
  Vec x_k;
  Vec x_lk;
  std::size_t k_used = 0;  // may fall short of the request at the Krylov grade
  bool truncated = false;
};

// x_k = Q_k G^† (alpha_1 beta_1 e_1), then the constrained minimizer
// x_lk = x_k - (L (I - Q_k Q_k^T))^† L x_k, all with dense pseudo-inverses.
DenseHybridResult dense_hybrid_solution(const DenseMatrix& a, std::span<const double> b,
                                        const DenseMatrix& l, std::size_t k,
                                        double pinv_cutoff = 1e-12);

struct ConditioningEntry {
  double kappa = 0.0;
  bool finite = true;
};

// kappa(L Q_k^perp) for k = k_lo..k_hi, Q_k^perp an orthonormal completion of
// the factorization basis. Requires l.rows() >= n - k for every requested k;
// sigma_min below 1e-14 sigma_max reports an infinite entry.
std::vector<ConditioningEntry> conditioning_sequence(const DenseMatrix& l,
                                                     const BidiagFactorization& f,
                                                     std::size_t k_lo, std::size_t k_hi);

struct FactorizationResiduals {
  double factor_max = 0.0;     // max |A Q_k - P_k+1 B_k|
  double projected_max = 0.0;  // max |Q_k+1^T A^T A Q_k - G_k|
};

FactorizationResiduals factorization_residuals(const DenseMatrix& a,
                                               const BidiagFactorization& f, std::size_t k);

// Dense n x k copy of the leading basis columns.
DenseMatrix basis_to_dense(const ColumnBasis& basis, std::size_t k);

}  // namespace gkreg
