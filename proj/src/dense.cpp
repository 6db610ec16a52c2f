#include "gkreg/dense.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gkreg {

namespace {

constexpr double jacobi_tol = 1e-14;

}  // namespace

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Vec matvec(const DenseMatrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) throw std::invalid_argument("matvec: dimension mismatch");
  Vec y(a.rows());
  kernels::gemv(a.values(), a.rows(), a.cols(), x, y);
  return y;
}

Vec matvec_transpose(const DenseMatrix& a, std::span<const double> x) {
  if (x.size() != a.rows()) throw std::invalid_argument("matvec_transpose: dimension mismatch");
  Vec y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) kernels::serial::axpy(x[i], a.row(i), y);
  return y;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: dimension mismatch");
  DenseMatrix c(a.rows(), b.cols());
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  auto* cp = c.data();
  const auto* ap = a.data();
  const auto* bp = b.data();
#pragma omp parallel for schedule(static) if (m * k * n >= kernels::parallel_grain)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
    double* crow = cp + static_cast<std::size_t>(i) * n;
    for (std::size_t l = 0; l < k; ++l) {
      const double ail = ap[static_cast<std::size_t>(i) * k + l];
      const double* brow = bp + l * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += ail * brow[j];
    }
  }
  return c;
}

double max_abs(const DenseMatrix& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

SvdResult jacobi_svd(const DenseMatrix& a, int max_sweeps) {
  const std::size_t m = a.rows(), n = a.cols();
  // Column-major working copies so the rotations touch contiguous memory.
  std::vector<double> w(m * n), v(n * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) w[i + j * m] = a(i, j);
  for (std::size_t j = 0; j < n; ++j) v[j + j * n] = 1.0;

  auto wcol = [&](std::size_t j) { return w.data() + j * m; };
  auto vcol = [&](std::size_t j) { return v.data() + j * n; };

  // Columns whose norm falls to rounding level carry no information: their
  // angles against anything are noise, so they are excluded from rotations
  // and from the convergence measure, and reported as exact zeros below.
  double fro = 0.0;
  for (double x : w) fro += x * x;
  fro = std::sqrt(fro);
  const double column_floor = 16.0 * std::numeric_limits<double>::epsilon() * fro;

  bool converged = (n <= 1);
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double aii = 0.0, ajj = 0.0, aij = 0.0;
        const double *wi = wcol(i), *wj = wcol(j);
        for (std::size_t r = 0; r < m; ++r) {
          aii += wi[r] * wi[r];
          ajj += wj[r] * wj[r];
          aij += wi[r] * wj[r];
        }
        const double ni = std::sqrt(aii), nj = std::sqrt(ajj);
        if (ni <= column_floor || nj <= column_floor) continue;
        const double rel = std::abs(aij) / (ni * nj);
        worst = std::max(worst, rel);
        if (rel <= 1e-15) continue;
        const double zeta = (ajj - aii) / (2.0 * aij);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        double* wi_m = wcol(i);
        double* wj_m = wcol(j);
        for (std::size_t r = 0; r < m; ++r) {
          const double x = wi_m[r], y = wj_m[r];
          wi_m[r] = cs * x - sn * y;
          wj_m[r] = sn * x + cs * y;
        }
        double* vi = vcol(i);
        double* vj = vcol(j);
        for (std::size_t r = 0; r < n; ++r) {
          const double x = vi[r], y = vj[r];
          vi[r] = cs * x - sn * y;
          vj[r] = sn * x + cs * y;
        }
      }
    }
    converged = worst <= jacobi_tol;
  }
  if (!converged) throw std::runtime_error("jacobi_svd: no convergence within sweep limit");

  Vec sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    const double* wj = wcol(j);
    for (std::size_t r = 0; r < m; ++r) s += wj[r] * wj[r];
    sigma[j] = std::sqrt(s);
    if (sigma[j] <= column_floor) sigma[j] = 0.0;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  SvdResult out;
  out.u = DenseMatrix(m, n);
  out.v = DenseMatrix(n, n);
  out.sigma.resize(n);
  for (std::size_t jj = 0; jj < n; ++jj) {
    const std::size_t src = order[jj];
    out.sigma[jj] = sigma[src];
    const double inv = sigma[src] > 0.0 ? 1.0 / sigma[src] : 0.0;
    const double* wj = wcol(src);
    for (std::size_t r = 0; r < m; ++r) out.u(r, jj) = wj[r] * inv;
    const double* vj = vcol(src);
    for (std::size_t r = 0; r < n; ++r) out.v(r, jj) = vj[r];
  }
  return out;
}

Vec singular_values(const DenseMatrix& a) { return jacobi_svd(a).sigma; }

DenseMatrix pseudo_inverse(const DenseMatrix& a, double rel_cutoff, double abs_cutoff) {
  const SvdResult svd = jacobi_svd(a);
  const std::size_t m = a.rows(), n = a.cols();
  const double cutoff =
      std::max(svd.sigma.empty() ? 0.0 : rel_cutoff * svd.sigma[0], abs_cutoff);
  DenseMatrix pinv(n, m);
  for (std::size_t l = 0; l < n; ++l) {
    if (svd.sigma[l] <= cutoff || svd.sigma[l] == 0.0) continue;
    const double inv = 1.0 / svd.sigma[l];
    for (std::size_t i = 0; i < n; ++i) {
      const double vil = svd.v(i, l) * inv;
      if (vil == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) pinv(i, j) += vil * svd.u(j, l);
    }
  }
  return pinv;
}

Vec qr_least_squares(DenseMatrix a, Vec b) {
  const std::size_t m = a.rows(), n = a.cols();
  if (m < n) throw std::invalid_argument("qr_least_squares: requires rows >= cols");
  if (b.size() != m) throw std::invalid_argument("qr_least_squares: rhs size mismatch");

  std::vector<double> hv(m);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = j; i < m; ++i) s += a(i, j) * a(i, j);
    s = std::sqrt(s);
    if (s == 0.0) throw std::runtime_error("qr_least_squares: rank-deficient matrix");
    const double alpha = a(j, j) > 0.0 ? -s : s;
    hv[j] = a(j, j) - alpha;
    for (std::size_t i = j + 1; i < m; ++i) hv[i] = a(i, j);
    double vtv = 0.0;
    for (std::size_t i = j; i < m; ++i) vtv += hv[i] * hv[i];
    const double beta = 2.0 / vtv;
    for (std::size_t c = j; c < n; ++c) {
      double dotv = 0.0;
      for (std::size_t i = j; i < m; ++i) dotv += hv[i] * a(i, c);
      const double f = beta * dotv;
      for (std::size_t i = j; i < m; ++i) a(i, c) -= f * hv[i];
    }
    double dotb = 0.0;
    for (std::size_t i = j; i < m; ++i) dotb += hv[i] * b[i];
    const double fb = beta * dotb;
    for (std::size_t i = j; i < m; ++i) b[i] -= fb * hv[i];
  }

  Vec x(n);
  for (std::size_t jj = n; jj-- > 0;) {
    double s = b[jj];
    for (std::size_t c = jj + 1; c < n; ++c) s -= a(jj, c) * x[c];
    if (a(jj, jj) == 0.0) throw std::runtime_error("qr_least_squares: zero pivot");
    x[jj] = s / a(jj, jj);
  }
  return x;
}

DenseMatrix orthogonal_completion(const double* q, std::size_t dim, std::size_t k) {
  if (k > dim) throw std::invalid_argument("orthogonal_completion: k > dim");
  // Householder QR of the k columns; the reflectors define the full square
  // factor whose trailing dim-k columns are the completion.
  std::vector<double> w(q, q + dim * k);
  auto col = [&](std::size_t j) { return w.data() + j * dim; };
  std::vector<double> reflect(dim * k, 0.0);
  std::vector<double> beta(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    double* cj = col(j);
    double s = 0.0;
    for (std::size_t i = j; i < dim; ++i) s += cj[i] * cj[i];
    s = std::sqrt(s);
    if (s == 0.0) throw std::runtime_error("orthogonal_completion: dependent columns");
    const double alpha = cj[j] > 0.0 ? -s : s;
    double* vj = reflect.data() + j * dim;
    vj[j] = cj[j] - alpha;
    for (std::size_t i = j + 1; i < dim; ++i) vj[i] = cj[i];
    double vtv = 0.0;
    for (std::size_t i = j; i < dim; ++i) vtv += vj[i] * vj[i];
    beta[j] = 2.0 / vtv;
    for (std::size_t c = j; c < k; ++c) {
      double* cc = col(c);
      double d = 0.0;
      for (std::size_t i = j; i < dim; ++i) d += vj[i] * cc[i];
      const double f = beta[j] * d;
      for (std::size_t i = j; i < dim; ++i) cc[i] -= f * vj[i];
    }
  }

  DenseMatrix out(dim, dim - k);
  std::vector<double> x(dim);
  for (std::size_t t = k; t < dim; ++t) {
    std::fill(x.begin(), x.end(), 0.0);
    x[t] = 1.0;
    for (std::size_t j = k; j-- > 0;) {
      const double* vj = reflect.data() + j * dim;
      double d = 0.0;
      for (std::size_t i = j; i < dim; ++i) d += vj[i] * x[i];
      const double f = beta[j] * d;
      for (std::size_t i = j; i < dim; ++i) x[i] -= f * vj[i];
    }
    for (std::size_t i = 0; i < dim; ++i) out(i, t - k) = x[i];
  }
  return out;
}

}  // namespace gkreg
