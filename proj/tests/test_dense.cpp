#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gkreg/dense.hpp"
#include "gkreg/operator.hpp"
#include "test_util.hpp"

using gkreg::DenseMatrix;
using gkreg::orthogonal_completion;
using gkreg::Vec;
using testutil::deviation_from_identity;
using testutil::max_abs_diff;
using testutil::random_dense;
using testutil::random_vec;

namespace {

DenseMatrix reconstruct(const gkreg::SvdResult& svd) {
  DenseMatrix us(svd.u.rows(), svd.u.cols());
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) = svd.u(i, j) * svd.sigma[j];
  return matmul(us, svd.v.transposed());
}

}  // namespace

TEST_SUITE("dense") {

TEST_CASE("matvec and matvec_transpose match hand loops") {
  const DenseMatrix a = random_dense(5, 7, 1);
  const Vec x = random_vec(7, 2), u = random_vec(5, 3);
  const Vec y = matvec(a, x), z = matvec_transpose(a, u);
  for (std::size_t i = 0; i < 5; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 7; ++j) s += a(i, j) * x[j];
    CHECK(y[i] == doctest::Approx(s).epsilon(1e-14));
  }
  for (std::size_t j = 0; j < 7; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < 5; ++i) s += a(i, j) * u[i];
    CHECK(z[j] == doctest::Approx(s).epsilon(1e-14));
  }
  CHECK_THROWS_AS((void)matvec(a, u), std::invalid_argument);
  CHECK_THROWS_AS((void)matvec_transpose(a, x), std::invalid_argument);
}

TEST_CASE("matmul matches a triple loop") {
  const DenseMatrix a = random_dense(3, 4, 4), b = random_dense(4, 2, 5);
  const DenseMatrix c = matmul(a, b);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < 4; ++l) s += a(i, l) * b(l, j);
      CHECK(c(i, j) == doctest::Approx(s).epsilon(1e-14));
    }
  CHECK_THROWS_AS((void)matmul(b, a), std::invalid_argument);
}

TEST_CASE("identity and transpose round-trip") {
  const DenseMatrix i3 = DenseMatrix::identity(3);
  CHECK(deviation_from_identity(i3) == 0.0);
  const DenseMatrix a = random_dense(4, 6, 6);
  CHECK(max_abs_diff(a.transposed().transposed(), a) == 0.0);
  CHECK(a.transposed()(2, 3) == a(3, 2));
  CHECK(max_abs(a) > 0.0);
}

TEST_CASE("jacobi_svd reconstructs a tall matrix") {
  const DenseMatrix a = random_dense(20, 12, 7);
  const auto svd = jacobi_svd(a);
  REQUIRE(svd.sigma.size() == 12);
  for (std::size_t j = 0; j + 1 < svd.sigma.size(); ++j)
    CHECK(svd.sigma[j] >= svd.sigma[j + 1]);
  CHECK(max_abs_diff(reconstruct(svd), a) <= 1e-12 * svd.sigma[0]);
  CHECK(deviation_from_identity(matmul(svd.u.transposed(), svd.u)) <= 1e-12);
  CHECK(deviation_from_identity(matmul(svd.v.transposed(), svd.v)) <= 1e-12);
}

TEST_CASE("jacobi_svd handles wide and zero matrices") {
  const DenseMatrix a = random_dense(8, 12, 8);
  const auto svd = jacobi_svd(a);
  REQUIRE(svd.sigma.size() == 12);
  std::size_t zeros = 0;
  for (double s : svd.sigma) zeros += s == 0.0;
  CHECK(zeros >= 4);
  CHECK(max_abs_diff(reconstruct(svd), a) <= 1e-12 * svd.sigma[0]);
  CHECK(deviation_from_identity(matmul(svd.v.transposed(), svd.v)) <= 1e-12);

  const DenseMatrix z(6, 4);
  for (double s : singular_values(z)) CHECK(s == 0.0);
}

TEST_CASE("first-difference singular values match the closed form") {
  const std::size_t n = 24;
  const DenseMatrix d = gkreg::first_difference_matrix(n).to_dense();
  const Vec sv = singular_values(d);
  REQUIRE(sv.size() == n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double want = 2.0 * std::sin(static_cast<double>(n - 1 - i) *
                                       std::numbers::pi / (2.0 * static_cast<double>(n)));
    CHECK(std::abs(sv[i] - want) <= 1e-12);
  }
  CHECK(sv[n - 1] <= 1e-12);  // rank n-1
}

TEST_CASE("pseudo_inverse satisfies the Moore-Penrose conditions") {
  const DenseMatrix a = random_dense(10, 6, 9);
  const DenseMatrix p = pseudo_inverse(a);
  REQUIRE(p.rows() == 6);
  REQUIRE(p.cols() == 10);
  const DenseMatrix ap = matmul(a, p), pa = matmul(p, a);
  CHECK(max_abs_diff(matmul(ap, a), a) <= 1e-10);
  CHECK(max_abs_diff(matmul(pa, p), p) <= 1e-10);
  CHECK(max_abs_diff(ap, ap.transposed()) <= 1e-10);
  CHECK(max_abs_diff(pa, pa.transposed()) <= 1e-10);
}

TEST_CASE("pseudo_inverse of a rank-one matrix") {
  const Vec u = random_vec(8, 10), v = random_vec(5, 11);
  DenseMatrix a(8, 5);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 5; ++j) a(i, j) = u[i] * v[j];
  const DenseMatrix p = pseudo_inverse(a);
  CHECK(max_abs_diff(matmul(matmul(a, p), a), a) <= 1e-10);
  // Exactly one singular value above the cutoff.
  const Vec sv = singular_values(a);
  CHECK(sv[0] > 0.0);
  for (std::size_t j = 1; j < sv.size(); ++j) CHECK(sv[j] <= 1e-12 * sv[0]);
}

TEST_CASE("qr_least_squares agrees with the pseudo-inverse route") {
  const DenseMatrix a = random_dense(30, 10, 12);
  const Vec b = random_vec(30, 13);
  const Vec x_qr = qr_least_squares(a, b);
  const Vec x_pinv = matvec(pseudo_inverse(a), b);
  CHECK(max_abs_diff(x_qr, x_pinv) <= 1e-10 * (1.0 + testutil::vec_norm(x_pinv)));
}

TEST_CASE("qr_least_squares recovers a consistent system exactly") {
  const DenseMatrix a = random_dense(15, 6, 14);
  const Vec x = random_vec(6, 15);
  const Vec b = matvec(a, x);
  CHECK(max_abs_diff(qr_least_squares(a, b), x) <= 1e-10);
}

TEST_CASE("qr_least_squares rejects bad shapes and singular input") {
  const DenseMatrix wide = random_dense(4, 6, 16);
  CHECK_THROWS_AS((void)qr_least_squares(wide, random_vec(4, 17)), std::invalid_argument);
  DenseMatrix a = random_dense(8, 3, 18);
  for (std::size_t i = 0; i < 8; ++i) a(i, 1) = 0.0;  // exactly dependent column
  CHECK_THROWS_AS((void)qr_least_squares(a, random_vec(8, 19)), std::runtime_error);
}

TEST_CASE("orthogonal_completion spans the complement") {
  const std::size_t n = 12, k = 5;
  const auto svd = jacobi_svd(random_dense(n, k, 20));
  // svd.u columns are orthonormal; transposed() lays them out contiguously.
  const DenseMatrix ut = svd.u.transposed();
  const DenseMatrix w = orthogonal_completion(ut.data(), n, k);
  REQUIRE(w.rows() == n);
  REQUIRE(w.cols() == n - k);
  CHECK(deviation_from_identity(matmul(w.transposed(), w)) <= 1e-12);
  CHECK(max_abs(matmul(svd.u.transposed(), w)) <= 1e-12);
}

TEST_CASE("orthogonal_completion edge ranks") {
  const double unused = 0.0;
  const DenseMatrix w0 = orthogonal_completion(&unused, 6, 0);
  REQUIRE(w0.rows() == 6);
  REQUIRE(w0.cols() == 6);
  CHECK(deviation_from_identity(matmul(w0.transposed(), w0)) <= 1e-13);

  const auto svd = jacobi_svd(random_dense(5, 5, 21));
  const DenseMatrix ut = svd.u.transposed();
  const DenseMatrix wfull = orthogonal_completion(ut.data(), 5, 5);
  CHECK(wfull.cols() == 0);
  CHECK_THROWS_AS((void)orthogonal_completion(ut.data(), 5, 6), std::invalid_argument);
}

}  // TEST_SUITE
