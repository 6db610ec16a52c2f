#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gkreg {

using Vec = std::vector<double>;

// Low-level array kernels. Every parallel kernel has a serial twin in
// kernels::serial with identical accumulation geometry, so the two produce
// bitwise-identical results for any OpenMP thread count. Reductions are
// chunked into fixed-size blocks whose partial sums are combined in block
// order; per-element accumulations run their inner loops in a fixed index
// order. Do not "optimize" the loop shapes here without keeping the two
// paths in lockstep.
namespace kernels {

inline constexpr std::size_t dot_chunk = 4096;
// Minimum number of scalar operations before a kernel spawns a parallel
// region; below this the OpenMP overhead dominates.
inline constexpr std::size_t parallel_grain = 16384;

namespace serial {

double dot(std::span<const double> x, std::span<const double> y);
double nrm2(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);
// y = A x with A row-major rows x cols.
void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y);
// c[j] = <q_j, v> for the k leading columns of the dim x k column-major q.
void basis_coeffs(const double* q, std::size_t dim, std::size_t k,
                  const double* v, double* c);
// v[i] += sign * sum_j q[i + j*dim] * c[j], inner sum in increasing j.
void basis_update(const double* q, std::size_t dim, std::size_t k,
                  const double* c, double sign, double* v);

}  // namespace serial

double dot(std::span<const double> x, std::span<const double> y);
double nrm2(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scal(double a, std::span<double> x);
void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y);
void basis_coeffs(const double* q, std::size_t dim, std::size_t k,
                  const double* v, double* c);
void basis_update(const double* q, std::size_t dim, std::size_t k,
                  const double* c, double sign, double* v);

}  // namespace kernels
}  // namespace gkreg
