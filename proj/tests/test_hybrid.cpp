#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gkreg/hybrid.hpp"
#include "gkreg/oracle.hpp"
#include "test_util.hpp"

using gkreg::BidiagFactorization;
using gkreg::DeflatedOperator;
using gkreg::DenseMatrix;
using gkreg::HybridRecord;
using gkreg::HybridRun;
using gkreg::LsqrOptions;
using gkreg::ProblemInstance;
using gkreg::Vec;
using testutil::max_abs_diff;
using testutil::random_vec;
using testutil::vec_norm;

namespace {

ProblemInstance noisy_shaw(std::size_t n, double eps, std::uint64_t seed) {
  return gkreg::make_problem("shaw", n, eps, seed, gkreg::RegChoice::d1);
}

HybridRun fake_run(std::initializer_list<double> errors, std::initializer_list<double> residuals) {
  HybridRun run;
  std::size_t k = 1;
  auto e = errors.begin();
  auto r = residuals.begin();
  for (; e != errors.end(); ++e, ++r) {
    HybridRecord rec;
    rec.k = k++;
    rec.relative_error = *e;
    rec.residual_norm = *r;
    run.records.push_back(rec);
  }
  return run;
}

}  // namespace

TEST_SUITE("hybrid") {

TEST_CASE("deflated operator with k = 0 is L itself") {
  const auto p = noisy_shaw(24, 1e-2, 1);
  BidiagFactorization f(p.a, p.b);
  f.ensure(3);
  const DeflatedOperator d(p.l, f, 0);
  const Vec x = random_vec(24, 2), u = random_vec(23, 3);
  CHECK(testutil::bitwise_equal(d.apply(x), p.l->apply(x)));
  CHECK(testutil::bitwise_equal(d.apply_transpose(u), p.l->apply_transpose(u)));
}

TEST_CASE("deflated operator annihilates the committed subspace") {
  const auto p = noisy_shaw(32, 1e-2, 1);
  BidiagFactorization f(p.a, p.b);
  f.ensure(6);
  const DeflatedOperator d(p.l, f, 5);
  CHECK(d.deflation_rank() == 5);
  // D (Q c) = L (I - QQ^T) Q c vanishes for any coefficients c.
  Vec x(32, 0.0);
  const Vec c = random_vec(5, 4);
  f.q_basis().accumulate(c, 1.0, x);
  CHECK(vec_norm(d.apply(x)) <= 1e-12 * (1.0 + vec_norm(x)));
  // And D^T maps into the orthogonal complement of the basis.
  const Vec w = d.apply_transpose(random_vec(31, 5));
  Vec coords(5);
  f.q_basis().coeffs(w, coords);
  CHECK(vec_norm(coords) <= 1e-12 * (1.0 + vec_norm(w)));
}

TEST_CASE("deflated operator matches its dense materialization") {
  const auto p = noisy_shaw(20, 1e-2, 1);
  BidiagFactorization f(p.a, p.b);
  f.ensure(4);
  const std::size_t k = 4;
  const DeflatedOperator d(p.l, f, k);
  // L (I - QQ^T) assembled densely.
  const DenseMatrix q = gkreg::basis_to_dense(f.q_basis(), k);
  DenseMatrix proj = DenseMatrix::identity(20);
  const DenseMatrix qqt = matmul(q, q.transposed());
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 20; ++j) proj(i, j) -= qqt(i, j);
  const DenseMatrix want = matmul(gkreg::to_dense(*p.l), proj);
  CHECK(testutil::max_abs_diff(gkreg::to_dense(d), want) <= 1e-12);
}

TEST_CASE("deflated operator validates dimensions") {
  const auto p = noisy_shaw(16, 1e-2, 1);
  BidiagFactorization f(p.a, p.b);
  f.ensure(3);
  CHECK_THROWS_AS(DeflatedOperator(gkreg::identity_operator(8), f, 2), std::invalid_argument);
  CHECK_THROWS_AS(DeflatedOperator(p.l, f, 9), std::out_of_range);
}

TEST_CASE("identity regularization reduces to the projected iterate") {
  auto p = gkreg::make_problem("shaw", 48, 1e-2, 1, gkreg::RegChoice::identity);
  BidiagFactorization f(p.a, p.b);
  LsqrOptions inner;
  inner.tol = 1e-10;
  for (std::size_t k : {1, 4, 8}) {
    f.ensure(k + 1);
    const auto step = hybrid_step(f, p.l, k, inner);
    // x_k lies in range(Q_k), so the inner correction is negligible.
    CHECK(vec_norm(step.z_k) <= 1e-8 * (1.0 + vec_norm(step.x_k)));
    CHECK(max_abs_diff(step.x_lk, step.x_k) <= 1e-8 * (1.0 + vec_norm(step.x_k)));
  }
}

TEST_CASE("hybrid step agrees with the dense oracle") {
  const auto p = noisy_shaw(40, 1e-2, 1);
  const auto* dense_a = dynamic_cast<const gkreg::DenseOperator*>(p.a.get());
  REQUIRE(dense_a != nullptr);
  const DenseMatrix l = gkreg::to_dense(*p.l);
  BidiagFactorization f(p.a, p.b);
  LsqrOptions inner;
  inner.tol = 1e-10;
  for (std::size_t k : {1, 3, 6}) {
    f.ensure(k + 1);
    const auto step = hybrid_step(f, p.l, k, inner);
    const auto want = gkreg::dense_hybrid_solution(dense_a->matrix(), p.b, l, k);
    REQUIRE(want.k_used == k);
    CHECK(max_abs_diff(step.x_lk, want.x_lk) <= 1e-6 * (1.0 + vec_norm(want.x_lk)));
  }
}

TEST_CASE("skipping the deflation gives a different estimator") {
  // The inner problem must be solved on L(I - QQ^T); running it on L itself
  // collapses the correction to the wrong subspace.
  const auto p = noisy_shaw(40, 1e-2, 1);
  const auto* dense_a = dynamic_cast<const gkreg::DenseOperator*>(p.a.get());
  const DenseMatrix l = gkreg::to_dense(*p.l);
  BidiagFactorization f(p.a, p.b);
  LsqrOptions inner;
  inner.tol = 1e-10;
  const std::size_t k = 5;
  f.ensure(k + 1);

  const Vec x_k = lsmr_iterate(f, k);
  const Vec rhs = p.l->apply(x_k);
  const auto wrong_inner = lsqr_solve(*p.l, rhs, inner);
  Vec x_wrong(x_k.size());
  for (std::size_t i = 0; i < x_k.size(); ++i) x_wrong[i] = x_k[i] - wrong_inner.solution[i];

  const auto oracle = gkreg::dense_hybrid_solution(dense_a->matrix(), p.b, l, k);
  const auto step = hybrid_step(f, p.l, k, inner);
  CHECK(max_abs_diff(step.x_lk, oracle.x_lk) <= 1e-6 * (1.0 + vec_norm(oracle.x_lk)));
  CHECK(max_abs_diff(x_wrong, oracle.x_lk) > 1e-3 * vec_norm(oracle.x_lk));
}

TEST_CASE("the correction never increases the seminorm") {
  const auto p = noisy_shaw(48, 1e-2, 1);
  BidiagFactorization f(p.a, p.b);
  LsqrOptions inner;
  inner.tol = 1e-8;
  for (std::size_t k = 1; k <= 8; ++k) {
    f.ensure(k + 1);
    const auto step = hybrid_step(f, p.l, k, inner);
    const double before = vec_norm(p.l->apply(step.x_k));
    const double after = vec_norm(p.l->apply(step.x_lk));
    CHECK(after <= before * (1.0 + 1e-10) + 1e-12);
  }
}

TEST_CASE("hyb_lsmr truncates at the Krylov grade") {
  ProblemInstance p;
  p.name = "identity";
  p.a = gkreg::identity_operator(8);
  p.l = gkreg::identity_operator(8);
  p.x_true = random_vec(8, 6);
  p.b_true = p.x_true;
  p.b = p.x_true;
  const auto run = hyb_lsmr(p, 5);
  REQUIRE(run.records.size() == 1);
  CHECK(run.breakdown_at.has_value());
  CHECK(*run.breakdown_at == 1);
  CHECK(run.records[0].relative_error <= 1e-10);
  CHECK(run.records[0].residual_norm <= 1e-10);
}

TEST_CASE("hyb_lsmr records the sweep in order") {
  auto p = noisy_shaw(32, 1e-2, 4);
  LsqrOptions inner;
  inner.tol = 1e-6;
  const auto run = hyb_lsmr(p, 10, inner);
  REQUIRE(run.records.size() == 10);
  double prev_ms = 0.0;
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    CHECK(run.records[i].k == i + 1);
    CHECK(std::isfinite(run.records[i].relative_error));
    CHECK(run.records[i].cumulative_elapsed_ms >= prev_ms);
    prev_ms = run.records[i].cumulative_elapsed_ms;
  }
  CHECK(run.noise_norm == doctest::Approx(1e-2 * vec_norm(p.b_true)).epsilon(1e-10));
  CHECK(run.reorthogonalized);
  CHECK(run.seed == 4);

  const auto run_plain = hyb_lsmr(p, 3, inner, false);
  CHECK(!run_plain.reorthogonalized);
}

TEST_CASE("hyb_lsmr validates k_max") {
  auto p = noisy_shaw(16, 1e-2, 1);
  CHECK_THROWS_AS((void)hyb_lsmr(p, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)hyb_lsmr(p, 17), std::invalid_argument);
}

TEST_CASE("noise-free recovery approaches the exact solution") {
  auto p = gkreg::make_problem("deriv2", 40, 0.0, 1, gkreg::RegChoice::d1);
  LsqrOptions inner;
  inner.tol = 1e-12;
  // The deflation bias only vanishes once Q spans the whole space, so the
  // full sweep ends with x_{L,n} = x_n = A^{-1} b up to solver accuracy.
  const auto run = hyb_lsmr(p, 40, inner);
  REQUIRE(run.records.back().k == 40);
  CHECK(run.records.back().inner_iterations == 0);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : run.records) best = std::min(best, r.relative_error);
  CHECK(best <= 1e-5);
}

TEST_CASE("select_best_k picks the smallest argmin") {
  CHECK(select_best_k(fake_run({0.9, 0.5, 0.7}, {3, 2, 1})) == 2);
  CHECK(select_best_k(fake_run({0.5, 0.3, 0.3}, {3, 2, 1})) == 2);
  CHECK(select_best_k(fake_run({0.5}, {1})) == 1);
  CHECK_THROWS_AS((void)select_best_k(HybridRun{}), std::invalid_argument);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS((void)select_best_k(fake_run({nan, nan}, {2, 1})), std::invalid_argument);
}

TEST_CASE("select_k_discrepancy crosses at the first admissible k") {
  const auto run = fake_run({0.9, 0.5, 0.7}, {5.0, 2.0, 1.0});
  const auto sel = select_k_discrepancy(run, 1.5, 1.0);
  CHECK(sel.k == 3);
  CHECK(sel.crossed);
  const auto sel2 = select_k_discrepancy(run, 2.1, 1.0);
  CHECK(sel2.k == 2);
  CHECK(sel2.crossed);
  const auto miss = select_k_discrepancy(run, 0.5, 1.0);
  CHECK(miss.k == 3);
  CHECK(!miss.crossed);
  CHECK_THROWS_AS((void)select_k_discrepancy(run, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)select_k_discrepancy(run, 1.0, 0.9), std::invalid_argument);
  CHECK_THROWS_AS((void)select_k_discrepancy(HybridRun{}, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("residual norms in the records match a dense recomputation") {
  auto p = noisy_shaw(24, 1e-2, 9);
  const auto run = hyb_lsmr(p, 6);
  for (const auto& r : run.records) {
    Vec res = p.a->apply(r.x_lk);
    for (std::size_t i = 0; i < res.size(); ++i) res[i] -= p.b[i];
    CHECK(r.residual_norm == doctest::Approx(vec_norm(res)).epsilon(1e-10));
  }
}

}  // TEST_SUITE
