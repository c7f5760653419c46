#include <cmath>

#include <doctest.h>

#include "../oracles.hpp"
#include "../test_util.hpp"
#include "nerve/eigensolve.hpp"
#include "nerve/synth.hpp"

using namespace nerve;

namespace {

Eigen::MatrixXd diag(std::initializer_list<double> v) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d[i++] = x;
  return d.asDiagonal();
}

void check_rel(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  REQUIRE(got.size() <= want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= tol * std::abs(want[i]));
}

}  // namespace

TEST_CASE("eig_full on diagonal matrices") {
  const auto s = eig_full(diag({3, 1, 2}));
  CHECK(s.lambdas == std::vector<double>{3, 2, 1});
  CHECK(s.total == 6.0);
  CHECK(s.normalized[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.normalized[1] == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(s.normalized[2] == doctest::Approx(1.0 / 6).epsilon(1e-15));
  CHECK(!s.truncated());
  CHECK(describe_kind(s) == "full");

  const auto z = eig_full(diag({2, 0}));
  CHECK(z.lambdas == std::vector<double>{2, 0});
}

TEST_CASE("eig_full matches Jacobi oracle") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = oracle::random_psd(6, 10, seed);
    const auto want = oracle::jacobi_eigenvalues(oracle::to_matrix(a));
    const auto got = eig_full(a);
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(got.lambdas[i] - want[i]) <= 1e-9);
    CHECK(std::abs(got.total - a.trace()) <= 1e-9 * a.trace());
  }
}

TEST_CASE("rotation and scale") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto a = oracle::random_psd(8, 12, seed + 100);
    const auto q = random_orthogonal(8, seed);
    const auto base = eig_full(a);
    const auto rotated = eig_full(Eigen::MatrixXd(q * a * q.transpose()));
    for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(rotated.lambdas[i] - base.lambdas[i]) <= 1e-8);
    for (const double c : {0.5, 3.0}) {
      const auto scaled = eig_full(Eigen::MatrixXd(c * a));
      for (std::size_t i = 0; i < 8; ++i)
        CHECK(std::abs(scaled.lambdas[i] - c * base.lambdas[i]) <= 1e-10 * c * base.lambdas[i]);
    }
  }
}

TEST_CASE("negative eigenvalues") {
  Eigen::MatrixXd m = diag({1, -1e-14});
  CHECK(eig_full(m).lambdas[1] == 0.0);
  CHECK_ERROR_KIND(eig_full(diag({1, -0.1})), ErrorKind::non_psd);
  CHECK_ERROR_KIND(eig_full(Eigen::MatrixXd::Zero(3, 3)), ErrorKind::degenerate_spectrum);
  CHECK_ERROR_KIND(eig_full(Eigen::MatrixXd::Zero(2, 3)), ErrorKind::argument);
}

TEST_CASE("make_spectrum validation") {
  CHECK_ERROR_KIND(make_spectrum({1, 2}, 2), ErrorKind::argument);
  CHECK_ERROR_KIND(make_spectrum({1, -1}, 2), ErrorKind::argument);
  CHECK_ERROR_KIND(make_spectrum({0, 0}, 2), ErrorKind::degenerate_spectrum);
  CHECK_ERROR_KIND(make_spectrum({1, 1, 1}, 2), ErrorKind::argument);
}

TEST_CASE("randsvd") {
  const auto s = eig_randsvd(diag({4, 3, 2, 1}), {.k = 4, .oversample = 0, .power_iters = 2, .seed = 1});
  check_rel(s.lambdas, {4, 3, 2, 1}, 1e-6);
  CHECK(s.truncated());
  CHECK(describe_kind(s) == "randsvd(4)");

  const auto top = eig_randsvd(diag({100, 10, 1e-3, 1e-4}), {.k = 2, .power_iters = 2, .seed = 3});
  REQUIRE(top.size() == 2);
  CHECK(top.dim == 4);
  check_rel(top.lambdas, {100, 10}, 1e-6);

  const auto a = oracle::random_psd(12, 30, 5);
  const auto r1 = eig_randsvd(a, {.k = 5, .seed = 9});
  const auto r2 = eig_randsvd(a, {.k = 5, .seed = 9});
  CHECK(r1.lambdas == r2.lambdas);
  CHECK_ERROR_KIND(eig_randsvd(a, {.k = 0}), ErrorKind::argument);
  CHECK_ERROR_KIND(eig_randsvd(a, {.k = 13}), ErrorKind::argument);
}

TEST_CASE("lanczos") {
  const auto s = eig_lanczos(diag({5, 4, 3, 2, 1}), {.k = 3, .max_iters = 15, .seed = 2});
  check_rel(s.lambdas, {5, 4, 3}, 1e-8);
  CHECK(describe_kind(s) == "lanczos(3)");

  const auto a = oracle::random_psd(8, 20, 77);
  const auto full = eig_full(a);
  const auto l = eig_lanczos(a, {.k = 8, .max_iters = 64, .seed = 4});
  check_rel(l.lambdas, full.lambdas, 1e-6);

  const auto l2 = eig_lanczos(a, {.k = 8, .max_iters = 64, .seed = 4});
  CHECK(l.lambdas == l2.lambdas);
  CHECK_ERROR_KIND(eig_lanczos(a, {.k = 4, .max_iters = 3}), ErrorKind::argument);
}

TEST_CASE("lanczos restarts after an invariant subspace") {
  // rank 2 matrix, ask for everything
  const auto l = eig_lanczos(diag({3, 1, 0, 0, 0}), {.k = 5, .max_iters = 5, .seed = 1});
  REQUIRE(l.size() == 5);
  CHECK(l.breakdowns >= 1);
  CHECK(l.lambdas[0] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(l.lambdas[1] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(l.lambdas[4] <= 1e-12);

  const auto one = eig_lanczos(diag({2, 0, 0, 0, 0, 0, 0, 0}), {.k = 4, .seed = 3});
  REQUIRE(one.size() == 4);
  CHECK(one.lambdas[0] == doctest::Approx(2.0).epsilon(1e-12));

  const auto repeated = eig_lanczos(diag({2, 2, 2, 1}), {.k = 4, .max_iters = 4, .seed = 5});
  REQUIRE(repeated.size() == 4);
  CHECK(repeated.lambdas[2] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(repeated.lambdas[3] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("summary overloads") {
  const auto batch = random_batch(1, 40, 5, 3);
  const auto cov = covariance_of(batch);
  const auto full = eig_full(cov);
  CHECK(full.dim == 5);
  check_rel(eig_randsvd(cov, 5, 10, 2, 1).lambdas, full.lambdas, 1e-6);
  check_rel(eig_lanczos(cov, 5, 40, 1).lambdas, full.lambdas, 1e-6);
}
