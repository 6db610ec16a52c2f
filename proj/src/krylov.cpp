#include "gkreg/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gkreg {

const char* to_string(LsqrStop reason) {
  switch (reason) {
    case LsqrStop::converged: return "converged";
    case LsqrStop::max_iterations: return "max_iterations";
    case LsqrStop::exact_breakdown: return "exact_breakdown";
  }
  return "unknown";
}

LsqrReport lsqr_solve(const LinearOperator& op, std::span<const double> rhs, LsqrOptions opts) {
  const std::size_t m = op.rows(), n = op.cols();
  if (rhs.size() != m) throw std::invalid_argument("lsqr_solve: rhs size mismatch");
  const double tol = std::max(opts.tol, opts.tol_floor);
  const std::size_t max_iter = opts.max_iterations ? opts.max_iterations : 2 * n;

  LsqrReport rep;
  rep.solution.assign(n, 0.0);

  const double bnorm = kernels::nrm2(rhs);
  if (bnorm == 0.0) return rep;

  Vec u(rhs.begin(), rhs.end());
  kernels::scal(1.0 / bnorm, u);
  Vec v = op.apply_transpose(u);
  double alpha = kernels::nrm2(v);
  if (alpha <= std::max(opts.alpha_floor, 0.0)) {
    // A^T rhs numerically vanishes: the zero vector already minimizes the
    // residual, and any nonzero iterate would be rounding noise scaled by
    // 1/alpha.
    rep.residual_norm = bnorm;
    rep.normal_equation_test = true;
    return rep;
  }
  kernels::scal(1.0 / alpha, v);

  Vec w = v;
  Vec x(n, 0.0);
  double phibar = bnorm;
  double rhobar = alpha;
  double anorm2 = alpha * alpha;
  Vec tmp_m(m), tmp_n(n);

  bool breakdown = false;
  while (rep.iterations < max_iter) {
    // u = A v - alpha u, beta = ||u||
    op.apply(v, tmp_m);
    kernels::scal(-alpha, u);
    kernels::axpy(1.0, tmp_m, u);
    double beta = kernels::nrm2(u);
    if (beta > 0.0) {
      kernels::scal(1.0 / beta, u);
      anorm2 += beta * beta;
      // v = A^T u - beta v, alpha = ||v||
      op.apply_transpose(u, tmp_n);
      kernels::scal(-beta, v);
      kernels::axpy(1.0, tmp_n, v);
      alpha = kernels::nrm2(v);
      if (alpha > 0.0) {
        kernels::scal(1.0 / alpha, v);
        anorm2 += alpha * alpha;
      } else {
        breakdown = true;
      }
    } else {
      breakdown = true;
      alpha = 0.0;
    }

    const double rho = std::sqrt(rhobar * rhobar + beta * beta);
    const double cs = rhobar / rho;
    const double sn = beta / rho;
    const double theta = sn * alpha;
    rhobar = -cs * alpha;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    kernels::axpy(phi / rho, w, x);
    // w = v - (theta / rho) w
    kernels::scal(-theta / rho, w);
    kernels::axpy(1.0, v, w);
    ++rep.iterations;

    const double anorm = std::sqrt(anorm2);
    const double rnorm = phibar;
    const double arnorm = alpha * std::abs(cs) * phibar;
    const double xnorm = kernels::nrm2(x);

    const bool test1 = rnorm <= tol * bnorm + tol * anorm * xnorm;
    const bool test2 = arnorm <= tol * anorm * rnorm;
    rep.residual_norm = rnorm;
    rep.operator_norm_estimate = anorm;
    rep.final_relative_residual = (anorm > 0.0 && rnorm > 0.0) ? arnorm / (anorm * rnorm) : 0.0;
    if (breakdown) {
      rep.stop_reason = LsqrStop::exact_breakdown;
      rep.normal_equation_test = test2;
      break;
    }
    if (test1 || test2) {
      rep.stop_reason = LsqrStop::converged;
      rep.normal_equation_test = test2;
      break;
    }
    rep.stop_reason = LsqrStop::max_iterations;
  }
  rep.solution = std::move(x);
  return rep;
}

Vec lsmr_iterate(const BidiagFactorization& f, std::size_t k) {
  DenseMatrix g = projected_normal_matrix(f, k);
  Vec rhs(k + 1, 0.0);
  rhs[0] = f.alpha(1) * f.beta(1);
  // Truncated pseudo-inverse rather than plain QR: once the recurrence digs
  // below the representable spectrum the projected matrix turns numerically
  // singular, and back-substitution would amplify rounding noise by 1/sigma.
  // The cutoff is pseudo_inverse's default so the dense oracle sees the same
  // truncation.
  Vec y = matvec(pseudo_inverse(g), rhs);
  Vec x(f.q_basis().dim(), 0.0);
  f.q_basis().accumulate(y, 1.0, x);
  return x;
}

}  // namespace gkreg
