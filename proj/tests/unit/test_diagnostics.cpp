#include <cmath>
#include <random>

#include <doctest.h>

#include "../oracles.hpp"
#include "../test_util.hpp"
#include "nerve/diagnostics.hpp"

using namespace nerve;

namespace {

MetricRecord rec(double js, double gain, double deee) {
  MetricRecord r;
  r.js = js;
  r.pr_gain = gain;
  r.delta_eee = deee;
  return r;
}

}  // namespace

TEST_CASE("regime examples") {
  CHECK(classify_regime(rec(0.4, 50, -0.3)) == RegimeLabel::beneficial_restructuring);
  CHECK(classify_regime(rec(0.001, 1.2, 0.005)) == RegimeLabel::spectral_inertia);
  CHECK(classify_regime(rec(0.05, 50, 0.05)) == RegimeLabel::expansion_without_equalization);
  CHECK(classify_regime(rec(0.4, 50, -0.05)) == RegimeLabel::compensatory_repair);
  CHECK(classify_regime(rec(0.05, 50, -0.05)) == RegimeLabel::unclassified);
  CHECK(classify_regime(rec(0.05, 1.5, 0.0)) == RegimeLabel::unclassified);
  CHECK(to_string(RegimeLabel::spectral_inertia) == "spectral_inertia");
}

TEST_CASE("rule boundaries are inclusive as listed") {
  const RegimeThresholds th;
  CHECK(classify_regime(rec(th.js_high, th.pr_gain_high, th.deee_strong_neg)) == RegimeLabel::beneficial_restructuring);
  CHECK(classify_regime(rec(th.js_zero, 1.0, th.deee_weak_band)) == RegimeLabel::spectral_inertia);
  CHECK(classify_regime(rec(0.0, th.pr_gain_high, -th.deee_weak_band)) == RegimeLabel::expansion_without_equalization);
}

TEST_CASE("classifier is total and matches a rule oracle") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> js(0.0, 0.7), gain(0.0, 60.0), de(-1.0, 1.0);
  const RegimeThresholds th;
  for (int i = 0; i < 10000; ++i) {
    const auto r = rec(js(gen), gain(gen), de(gen));
    const auto label = classify_regime(r, th);
    RegimeLabel want = RegimeLabel::unclassified;
    const bool hi = r.js >= 0.1 && r.pr_gain >= 5.0;
    if (hi && r.delta_eee <= -0.1)
      want = RegimeLabel::beneficial_restructuring;
    else if (hi)
      want = RegimeLabel::compensatory_repair;
    else if (r.js < 0.1 && r.pr_gain >= 5.0 && (std::abs(r.delta_eee) <= 0.02 || r.delta_eee > 0))
      want = RegimeLabel::expansion_without_equalization;
    else if (r.js <= 0.01 && std::abs(r.delta_eee) <= 0.02)
      want = RegimeLabel::spectral_inertia;
    CHECK(label == want);
  }
  CHECK_ERROR_KIND(classify_regime(rec(std::nan(""), 1, 0)), ErrorKind::data);
}

TEST_CASE("threshold validation") {
  RegimeThresholds th;
  th.validate();
  th.js_zero = 0.2;
  CHECK_ERROR_KIND(th.validate(), ErrorKind::argument);
  th = {};
  th.deee_weak_band = 0.0;
  CHECK_ERROR_KIND(th.validate(), ErrorKind::argument);
  th = {};
  th.pr_gain_moderate = 6.0;
  CHECK_ERROR_KIND(th.validate(), ErrorKind::argument);
  th = {};
  th.deee_strong_neg = 0.1;
  CHECK_ERROR_KIND(th.validate(), ErrorKind::argument);
}

TEST_CASE("signature lookup over all 81 tuples") {
  const Trend all[] = {Trend::up, Trend::down, Trend::flat};
  int healthy = 0, collapse = 0;
  for (Trend se : all)
    for (Trend pr : all)
      for (Trend e : all)
        for (Trend js : all) {
          std::string_view want = kNoMatch;
          if (se == Trend::up && pr == Trend::up && e == Trend::down) want = kHealthyFlattening;
          if (se == Trend::down && pr == Trend::down && e == Trend::up) want = kSpectralCollapse;
          const auto got = match_signature({se, pr, e, js});
          CHECK(got == want);
          healthy += got == kHealthyFlattening;
          collapse += got == kSpectralCollapse;
        }
  CHECK(healthy == 3);
  CHECK(collapse == 3);
  CHECK(match_signature({Trend::flat, Trend::flat, Trend::flat, Trend::flat}) == "no match");
}

TEST_CASE("pearson") {
  CHECK(pearson({1, 2, 3, 4}, {3, 5, 7, 9}).r == doctest::Approx(1.0));
  CHECK(pearson({1, 2, 3}, {-1, -2, -3}).r == doctest::Approx(-1.0));
  CHECK(pearson({1, 2, 3}, {2, 1, 4}).r == doctest::Approx(0.6546536707079771).epsilon(1e-14));
  CHECK(pearson({1, 2, 3}, {1, 3, 2}).r == doctest::Approx(0.5).epsilon(1e-14));
  const auto four = pearson({1, 2, 3, 4}, {2, 1, 4, 3}, "se");
  CHECK(four.r == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(four.n_points == 4);
  CHECK(four.metric_name == "se");

  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(7), y(7), neg(7), aff(7);
    for (int i = 0; i < 7; ++i) {
      x[i] = nd(gen);
      y[i] = nd(gen);
      neg[i] = -y[i];
      aff[i] = 2.5 * y[i] + 4.0;
    }
    const double r = pearson(x, y).r;
    CHECK(std::abs(r - oracle::pearson(x, y)) <= 1e-12);
    CHECK(std::abs(pearson(x, neg).r + r) <= 1e-12);
    CHECK(std::abs(pearson(x, aff).r - r) <= 1e-12);
  }
  CHECK_ERROR_KIND(pearson({1, 2}, {1, 2}), ErrorKind::argument);
  CHECK_ERROR_KIND(pearson({1, 2, 3}, {1, 2}), ErrorKind::argument);
  CHECK_ERROR_KIND(pearson({1, 1, 1}, {1, 2, 3}), ErrorKind::undefined_correlation);
}

TEST_CASE("width utilization") {
  CHECK(width_utilization(1822, 6144) == doctest::Approx(0.2965494791666667).epsilon(1e-15));
  CHECK(width_utilization(71, 6144) == doctest::Approx(0.011555989583333334).epsilon(1e-15));
  CHECK(width_utilization(6144, 6144) == 1.0);
  CHECK_ERROR_KIND(width_utilization(0.5, 10), ErrorKind::argument);
  CHECK_ERROR_KIND(width_utilization(11, 10), ErrorKind::argument);
}

TEST_CASE("trends") {
  CHECK(trend_of({1, 2, 3, 4}, 4) == Trend::up);
  CHECK(trend_of({4, 3, 2}, 3) == Trend::down);
  CHECK(trend_of({2, 2, 2}, 3) == Trend::flat);
  CHECK(trailing_slope({0, 0.1, -0.1}, 3) == doctest::Approx(-0.05));

  std::vector<double> s{0, 0.1, -0.1};
  for (int k = 1; k <= 8; ++k) s.push_back(0.0005 * k);
  CHECK(trailing_slope(s, 4) == doctest::Approx(0.0005));
  CHECK(trend_of(s, 4) == Trend::flat);
  CHECK(trend_of(s, 4, 1e-4) == Trend::up);
  CHECK_ERROR_KIND(trend_of({1}, 1), ErrorKind::argument);
  CHECK_ERROR_KIND(trend_of({1, 2}, 3), ErrorKind::argument);
}
