#include "gkreg/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gkreg/operator.hpp"

namespace gkreg {

DenseMatrix basis_to_dense(const ColumnBasis& basis, std::size_t k) {
  if (k > basis.size()) throw std::out_of_range("basis_to_dense: k exceeds basis size");
  DenseMatrix q(basis.dim(), k);
  for (std::size_t j = 0; j < k; ++j) {
    auto col = basis.col(j);
    for (std::size_t i = 0; i < basis.dim(); ++i) q(i, j) = col[i];
  }
  return q;
}

DenseHybridResult dense_hybrid_solution(const DenseMatrix& a, std::span<const double> b,
                                        const DenseMatrix& l, std::size_t k,
                                        double pinv_cutoff) {
  const std::size_t n = a.cols();
  if (n > oracle_dim_cap || a.rows() > oracle_dim_cap)
    throw std::invalid_argument("dense_hybrid_solution: beyond the oracle size cap");
  if (l.cols() != n) throw std::invalid_argument("dense_hybrid_solution: L column mismatch");
  if (k == 0) throw std::invalid_argument("dense_hybrid_solution: k must be positive");

  BidiagOptions opts;
  opts.reorthogonalize = true;
  opts.max_steps = std::max<std::size_t>(k + 1, 300);
  BidiagFactorization f(dense_operator(a), b, opts);
  f.ensure(k + 1);

  DenseHybridResult out;
  out.k_used = std::min(k, f.steps());
  out.truncated = out.k_used < k;
  const std::size_t ku = out.k_used;
  if (ku == 0) throw std::runtime_error("dense_hybrid_solution: immediate breakdown");

  DenseMatrix g = projected_normal_matrix(f, ku);
  Vec rhs(ku + 1, 0.0);
  rhs[0] = f.alpha(1) * f.beta(1);
  Vec y = matvec(pseudo_inverse(g, pinv_cutoff), rhs);
  DenseMatrix qk = basis_to_dense(f.q_basis(), ku);
  out.x_k = matvec(qk, y);

  // Dense deflation: D = L (I - Q_k Q_k^T), correction z = D^† L x_k.
  DenseMatrix proj(n, n);
  for (std::size_t i = 0; i < n; ++i) proj(i, i) = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < ku; ++c) s += qk(i, c) * qk(j, c);
      proj(i, j) -= s;
    }
  DenseMatrix d = matmul(l, proj);
  Vec lxk = matvec(l, out.x_k);
  // Anchor the truncation to ||L||: once the deflation annihilates L the
  // whole of d is rounding noise and the correction must vanish.
  const double l_scale = singular_values(l).front();
  Vec z = matvec(pseudo_inverse(d, pinv_cutoff, pinv_cutoff * l_scale), lxk);
  out.x_lk.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.x_lk[i] = out.x_k[i] - z[i];
  return out;
}

std::vector<ConditioningEntry> conditioning_sequence(const DenseMatrix& l,
                                                     const BidiagFactorization& f,
                                                     std::size_t k_lo, std::size_t k_hi) {
  const std::size_t n = f.q_basis().dim();
  if (n > oracle_dim_cap)
    throw std::invalid_argument("conditioning_sequence: beyond the oracle size cap");
  if (l.cols() != n) throw std::invalid_argument("conditioning_sequence: L column mismatch");
  if (k_lo < 1 || k_lo > k_hi) throw std::invalid_argument("conditioning_sequence: bad k range");
  if (k_hi > f.steps())
    throw std::out_of_range("conditioning_sequence: k_hi exceeds the factorization");

  std::vector<ConditioningEntry> out;
  out.reserve(k_hi - k_lo + 1);
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    if (l.rows() + k < n)
      throw std::invalid_argument("conditioning_sequence: needs l.rows() >= n - k");
    DenseMatrix qperp = orthogonal_completion(f.q_basis().data(), n, k);
    Vec sv = singular_values(matmul(l, qperp));
    const double smax = sv.front();
    const double smin = sv.back();
    ConditioningEntry e;
    if (smin <= 1e-14 * smax || smin == 0.0) {
      e.kappa = std::numeric_limits<double>::infinity();
      e.finite = false;
    } else {
      e.kappa = smax / smin;
    }
    out.push_back(e);
  }
  return out;
}

FactorizationResiduals factorization_residuals(const DenseMatrix& a,
                                               const BidiagFactorization& f, std::size_t k) {
  const std::size_t n = a.cols(), m = a.rows();
  if (n > oracle_dim_cap || m > oracle_dim_cap)
    throw std::invalid_argument("factorization_residuals: beyond the oracle size cap");
  if (k == 0 || k > f.steps()) throw std::out_of_range("factorization_residuals: k out of range");

  DenseMatrix qk = basis_to_dense(f.q_basis(), k);
  const std::size_t pcols = std::min(k + 1, f.p_basis().size());
  DenseMatrix p = basis_to_dense(f.p_basis(), pcols);
  DenseMatrix bk(pcols, k);
  for (std::size_t j = 1; j <= k; ++j) {
    bk(j - 1, j - 1) = f.alpha(j);
    if (j < pcols) bk(j, j - 1) = f.beta_or_zero(j + 1);
  }
  DenseMatrix aq = matmul(a, qk);
  DenseMatrix pb = matmul(p, bk);
  FactorizationResiduals out;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j)
      out.factor_max = std::max(out.factor_max, std::abs(aq(i, j) - pb(i, j)));

  DenseMatrix g = projected_normal_matrix(f, k);
  const std::size_t qcols = std::min(k + 1, f.q_basis().size());
  DenseMatrix qk1 = basis_to_dense(f.q_basis(), qcols);
  DenseMatrix ata_q = matmul(a.transposed(), aq);       // A^T A Q_k
  DenseMatrix top = matmul(qk1.transposed(), ata_q);    // qcols x k
  for (std::size_t i = 0; i < qcols; ++i)
    for (std::size_t j = 0; j < k; ++j)
      out.projected_max = std::max(out.projected_max, std::abs(top(i, j) - g(i, j)));
  if (qcols == k)  // grade reached: the coupling row of G must vanish
    out.projected_max = std::max(out.projected_max, std::abs(g(k, k - 1)));
  return out;
}

}  // namespace gkreg
