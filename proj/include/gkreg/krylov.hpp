#pragma once

#include <cstddef>
#include <span>

#include "gkreg/bidiag.hpp"
#include "gkreg/operator.hpp"

namespace gkreg {

struct LsqrOptions {
  double tol = 1e-6;               // atol and btol of the two stopping tests
  std::size_t max_iterations = 0;  // 0 picks 2 * cols at solve time
  double tol_floor = 1e-14;        // effective tolerance never goes below this
  // An initial alpha at or below this is treated as a numerically zero
  // operator: return the zero solution instead of amplifying rounding noise.
  double alpha_floor = 0.0;
};

enum class LsqrStop { converged, max_iterations, exact_breakdown };

struct LsqrReport {
  Vec solution;
  std::size_t iterations = 0;
  LsqrStop stop_reason = LsqrStop::converged;
  double residual_norm = 0.0;            // ||b - A x|| estimate at exit
  double final_relative_residual = 0.0;  // ||A^T r|| / (||A|| ||r||) at exit
  double operator_norm_estimate = 0.0;   // Frobenius-style accumulation
  bool normal_equation_test = false;     // true when the ||A^T r|| test fired
};

// Paige-Saunders LSQR for min ||op x - rhs||. Stops when either
//   ||r|| <= tol ||rhs|| + tol ||A|| ||x||   or
//   ||A^T r|| <= tol ||A|| ||r||
// holds, on exact breakdown, or at the iteration cap.
LsqrReport lsqr_solve(const LinearOperator& op, std::span<const double> rhs,
                      LsqrOptions opts = {});

// k-th LSMR iterate from the projected least-squares problem
//   min || [B_k^T B_k; alpha_k+1 beta_k+1 e_k^T] y - alpha_1 beta_1 e_1 ||,
// mapped back as x_k = Q_k y. The small system is solved by a truncated
// pseudo-inverse (pseudo_inverse's default cutoff), which keeps the iterate
// bounded when the projected matrix goes numerically rank-deficient.
Vec lsmr_iterate(const BidiagFactorization& f, std::size_t k);

const char* to_string(LsqrStop reason);

}  // namespace gkreg
