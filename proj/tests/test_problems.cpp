#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <unistd.h>

#include "gkreg/problems.hpp"
#include "test_util.hpp"

using gkreg::DenseMatrix;
using gkreg::RegChoice;
using gkreg::Vec;
using testutil::bitwise_equal;
using testutil::max_abs_diff;
using testutil::vec_norm;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("gkreg-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

}  // namespace

TEST_SUITE("problems") {

TEST_CASE("generators are deterministic and consistent") {
  for (const char* name : {"shaw", "baart", "gravity", "deriv2", "heat"}) {
    const auto p1 = gkreg::generate(name, 32);
    const auto p2 = gkreg::generate(name, 32);
    CHECK(p1.a->rows() == 32);
    CHECK(p1.a->cols() == 32);
    CHECK(max_abs_diff(p1.a->matrix(), p2.a->matrix()) == 0.0);
    CHECK(bitwise_equal(p1.x_true, p2.x_true));
    CHECK(bitwise_equal(p1.b_true, p2.b_true));
    // b_true is assembled as A x_true.
    CHECK(bitwise_equal(p1.b_true, p1.a->apply(p1.x_true)));
    CHECK(vec_norm(p1.x_true) > 0.0);
  }
}

TEST_CASE("generator input validation") {
  CHECK_THROWS_AS((void)gkreg::generate("unknown", 32), std::invalid_argument);
  CHECK_THROWS_AS((void)gkreg::generate("shaw", 4), std::invalid_argument);
  CHECK_THROWS_AS((void)gkreg::generate("shaw", 33), std::invalid_argument);
  CHECK_THROWS_AS((void)gkreg::generate("heat", 33), std::invalid_argument);
  CHECK(gkreg::generate("baart", 33).a->rows() == 33);  // odd n fine elsewhere
}

TEST_CASE("shaw kernel is symmetric and severely ill-conditioned") {
  const auto p = gkreg::generate("shaw", 64);
  const DenseMatrix& a = p.a->matrix();
  double asym = 0.0;
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < i; ++j) asym = std::max(asym, std::abs(a(i, j) - a(j, i)));
  CHECK(asym <= 1e-14 * max_abs(a));
  const Vec sv = singular_values(a);
  REQUIRE(sv.size() == 64);
  CHECK(sv[0] / sv[31] >= 1e10);
}

TEST_CASE("singular values decay without cliffs above the noise floor") {
  // Consecutive gaps in the leading half stay under two orders of magnitude
  // until the spectrum falls below machine-level relative size.
  for (const char* name : {"shaw", "baart", "gravity", "deriv2", "heat"}) {
    const Vec sv = singular_values(gkreg::generate(name, 48).a->matrix());
    const double floor = 1e-14 * sv[0];
    for (std::size_t j = 0; j + 1 < 24; ++j) {
      if (sv[j + 1] <= floor) break;
      CHECK(sv[j] / sv[j + 1] <= 100.0);
    }
  }
}

TEST_CASE("add_noise scales and reproduces exactly") {
  const auto p = gkreg::generate("gravity", 40);
  const Vec b1 = gkreg::add_noise(p.b_true, 1e-2, 7);
  const Vec b2 = gkreg::add_noise(p.b_true, 1e-2, 7);
  CHECK(bitwise_equal(b1, b2));
  const Vec b3 = gkreg::add_noise(p.b_true, 1e-2, 8);
  CHECK(!bitwise_equal(b1, b3));

  Vec diff(b1.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = b1[i] - p.b_true[i];
  const double want = 1e-2 * vec_norm(p.b_true);
  CHECK(vec_norm(diff) == doctest::Approx(want).epsilon(1e-12));

  CHECK(bitwise_equal(gkreg::add_noise(p.b_true, 0.0, 7), p.b_true));
  CHECK_THROWS_AS((void)gkreg::add_noise(p.b_true, -1e-3, 7), std::invalid_argument);
  CHECK_THROWS_AS((void)gkreg::add_noise(Vec(5, 0.0), 1e-2, 7), std::invalid_argument);
}

TEST_CASE("relative_error handles the regularization operator") {
  const gkreg::IdentityOperator id(3);
  const Vec xt = {1.0, 2.0, 2.0};
  const Vec xr = {1.0, 2.0, 5.0};
  CHECK(gkreg::relative_error(id, xr, xt) == doctest::Approx(1.0));  // ||(0,0,3)||/3

  const auto d1 = gkreg::first_derivative_operator(3);
  // L x_true = (-1, 0), L diff = (0, -3).
  CHECK(gkreg::relative_error(*d1, xr, xt) == doctest::Approx(3.0));
  CHECK_THROWS_AS((void)gkreg::relative_error(*d1, xr, Vec(3, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS((void)gkreg::relative_error(id, Vec(2, 0.0), xt), std::invalid_argument);
}

TEST_CASE("blur with band zero degenerates to the identity") {
  const auto blur = gkreg::generate_blur2d(8, 0, 0.7);
  CHECK(bitwise_equal(blur.b_true, blur.x_true));
  const Vec x = testutil::random_vec(64, 12);
  CHECK(bitwise_equal(blur.a->apply(x), x));
}

TEST_CASE("blur factor rows are normalized in the interior") {
  const auto blur = gkreg::generate_blur2d(16, 3, 0.7);
  const DenseMatrix t = blur.a->factor().to_dense();
  for (std::size_t i = 3; i < 13; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 16; ++j) s += t(i, j);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Truncated boundary rows lose mass.
  double s0 = 0.0;
  for (std::size_t j = 0; j < 16; ++j) s0 += t(0, j);
  CHECK(s0 < 1.0);
  // The image holds the two features plus background.
  double lo = 1e300, hi = -1e300;
  for (double v : blur.x_true) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo == 0.0);
  CHECK(hi == 1.0);
}

TEST_CASE("blur parameter validation") {
  CHECK_THROWS_AS((void)gkreg::generate_blur2d(3, 1, 0.7), std::invalid_argument);
  CHECK_THROWS_AS((void)gkreg::generate_blur2d(8, 8, 0.7), std::invalid_argument);
  CHECK_THROWS_AS((void)gkreg::generate_blur2d(8, 2, 0.0), std::invalid_argument);
}

TEST_CASE("make_problem assembles operator, noise, and regularizer") {
  const auto p = gkreg::make_problem("shaw", 32, 1e-2, 3, RegChoice::d1);
  CHECK(p.name == "shaw");
  CHECK(p.epsilon == 1e-2);
  CHECK(p.seed == 3);
  CHECK(p.has_x_true());
  CHECK(p.l->rows() == 31);
  CHECK(p.l->cols() == 32);
  CHECK(bitwise_equal(p.b, gkreg::add_noise(p.b_true, 1e-2, 3)));

  const auto pb = gkreg::make_problem("blur", 8, 1e-2, 3, RegChoice::d2d_kron);
  CHECK(pb.a->rows() == 64);
  CHECK(pb.l->rows() == 2 * 8 * 7);
  CHECK(pb.l->cols() == 64);

  CHECK_THROWS_AS((void)gkreg::make_problem("shaw", 32, 1e-2, 3, RegChoice::d2d_kron),
                  std::invalid_argument);
}

TEST_CASE("matrix and vector files round-trip bitwise") {
  TempDir tmp;
  const DenseMatrix a = testutil::random_dense(7, 5, 13);
  gkreg::save_matrix(tmp.path / "A.txt", a);
  CHECK(max_abs_diff(gkreg::load_matrix(tmp.path / "A.txt"), a) == 0.0);

  const Vec v = testutil::random_vec(11, 14);
  gkreg::save_vector(tmp.path / "v.txt", v);
  CHECK(bitwise_equal(gkreg::load_vector(tmp.path / "v.txt"), v));

  CHECK_THROWS_AS((void)gkreg::load_matrix(tmp.path / "missing.txt"), std::runtime_error);
  CHECK_THROWS_AS((void)gkreg::load_vector(tmp.path / "A.txt"), std::runtime_error);
}

TEST_CASE("problems import from files") {
  TempDir tmp;
  const auto src = gkreg::generate("gravity", 16);
  gkreg::save_matrix(tmp.path / "A.txt", src.a->matrix());
  gkreg::save_vector(tmp.path / "x_true.txt", src.x_true);

  const auto p = gkreg::make_problem_from_files(tmp.path, 1e-2, 5, RegChoice::d1);
  CHECK(p.has_x_true());
  CHECK(bitwise_equal(p.x_true, src.x_true));
  CHECK(max_abs_diff(p.b_true, src.b_true) <= 1e-14 * vec_norm(src.b_true));
  CHECK(p.l->rows() == 15);
  CHECK_THROWS_AS((void)gkreg::make_problem_from_files(tmp.path, 1e-2, 5, RegChoice::d2d_kron),
                  std::invalid_argument);

  // b_true only: usable, but no error metric.
  TempDir tmp2;
  gkreg::save_matrix(tmp2.path / "A.txt", src.a->matrix());
  gkreg::save_vector(tmp2.path / "b_true.txt", src.b_true);
  const auto p2 = gkreg::make_problem_from_files(tmp2.path, 1e-2, 5, RegChoice::identity);
  CHECK(!p2.has_x_true());
  CHECK(bitwise_equal(p2.b_true, src.b_true));

  // Neither exact vector present.
  TempDir tmp3;
  gkreg::save_matrix(tmp3.path / "A.txt", src.a->matrix());
  CHECK_THROWS_AS((void)gkreg::make_problem_from_files(tmp3.path, 1e-2, 5, RegChoice::identity),
                  std::runtime_error);
}

TEST_CASE("reg choice parsing round-trips") {
  using gkreg::reg_choice_from_string;
  CHECK(reg_choice_from_string("identity") == RegChoice::identity);
  CHECK(reg_choice_from_string("d1") == RegChoice::d1);
  CHECK(reg_choice_from_string("d2d-kron") == RegChoice::d2d_kron);
  CHECK_THROWS_AS((void)reg_choice_from_string("laplace"), std::invalid_argument);
  for (RegChoice r : {RegChoice::identity, RegChoice::d1, RegChoice::d2d_kron})
    CHECK(reg_choice_from_string(gkreg::to_string(r)) == r);
}

}  // TEST_SUITE
