#include <cmath>

#include <doctest.h>

#include "../test_util.hpp"
#include "nerve/covariance.hpp"
#include "nerve/metrics.hpp"
#include "nerve/synth.hpp"

using namespace nerve;

TEST_CASE("families") {
  const auto one = generate_spectrum(SpectrumSpec::one_hot(768));
  CHECK(eee(one) == doctest::Approx(767.0 / 768.0).epsilon(1e-14));

  const auto half = generate_spectrum(SpectrumSpec::uniform(768, 384));
  CHECK(std::abs(eee(half) - 0.5) <= 1e-12);
  CHECK(std::abs(participation_ratio(half) - 384.0) <= 1e-12);
  CHECK(std::abs(spectral_entropy(half) - 5.950642552587727) <= 1e-12);

  const auto geo = generate_spectrum(SpectrumSpec::geometric(4, 0.5));
  CHECK(geo.lambdas[1] / geo.lambdas[0] == 0.5);
  CHECK(geo.lambdas[3] / geo.lambdas[0] == 0.125);

  const auto lin = generate_spectrum(SpectrumSpec::linear(4, 2.0));
  CHECK(lin.lambdas[0] > lin.lambdas[3]);
  CHECK(lin.lambdas[3] > 0.0);

  const auto ex = generate_spectrum(SpectrumSpec::explicit_values({1, 3}, 4));
  CHECK(ex.lambdas == std::vector<double>{3, 1, 0, 0});
}

TEST_CASE("every family yields a valid spectrum") {
  for (const char* text : {"uniform", "uniform:3", "one_hot", "geometric:0.7", "linear", "explicit:5;2;2"}) {
    const auto s = generate_spectrum(parse_spectrum_spec(text, 6, 2.0));
    CHECK(s.dim == 6);
    CHECK(std::is_sorted(s.lambdas.rbegin(), s.lambdas.rend()));
    CHECK(s.lambdas.back() >= 0.0);
    double sum = 0.0;
    for (double p : s.normalized) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK_ERROR_KIND(parse_spectrum_spec("weird", 4), ErrorKind::argument);
  CHECK_ERROR_KIND(generate_spectrum(parse_spectrum_spec("geometric:2", 4)), ErrorKind::argument);
  CHECK_ERROR_KIND(parse_spectrum_spec("geometric:x", 4), ErrorKind::argument);
  CHECK_ERROR_KIND(generate_spectrum(parse_spectrum_spec("uniform:9", 4)), ErrorKind::argument);
}

TEST_CASE("random_orthogonal") {
  const auto q = random_orthogonal(7, 3);
  CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(7, 7)).norm() <= 1e-12);
  CHECK(random_orthogonal(7, 3) == q);
  CHECK(random_orthogonal(7, 4) != q);
}

TEST_CASE("gaussian batches") {
  const auto spec = SpectrumSpec::uniform(16, 16);
  const auto a = sample_gaussian_batch(spec, 800, 5);
  const auto b = sample_gaussian_batch(spec, 800, 5);
  CHECK(a.data == b.data);
  CHECK(a.rows() == 800);
  CHECK(a.dim() == 16);
  const double pr = participation_ratio(eig_full(covariance_of(a)));
  CHECK(std::abs(pr - 16.0) <= 0.1 * 16.0);

  const auto one = sample_gaussian_batch(SpectrumSpec::one_hot(2), 20, 1);
  CHECK(std::abs(participation_ratio(eig_full(covariance_of(one))) - 1.0) <= 0.05);
  CHECK_ERROR_KIND(sample_gaussian_batch(spec, 159, 1), ErrorKind::argument);

  DumpHeader h;
  h.batch = 4;
  h.seq_len = 50;
  h.layer = 3;
  h.tag = Tag::post;
  const auto f32 = sample_gaussian_batch(SpectrumSpec::linear(8), h, 2);
  CHECK(f32.header.feature_dim == 8);
  CHECK(f32.header.layer == 3);
  CHECK(f32.data(5, 5) == static_cast<double>(static_cast<float>(f32.data(5, 5))));
}

TEST_CASE("sample spectrum approaches population spectrum as n grows") {
  const auto spec = SpectrumSpec::geometric(8, 0.6);
  const double want_pr = participation_ratio(generate_spectrum(spec));
  const double want_eee = eee(generate_spectrum(spec));
  double err_small = 0.0, err_large = 0.0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto small = eig_full(covariance_of(sample_gaussian_batch(spec, 80, seed)));
    const auto large = eig_full(covariance_of(sample_gaussian_batch(spec, 8000, seed)));
    err_small += std::abs(participation_ratio(small) - want_pr) + std::abs(eee(small) - want_eee);
    err_large += std::abs(participation_ratio(large) - want_pr) + std::abs(eee(large) - want_eee);
  }
  CHECK(err_large < err_small);
}
