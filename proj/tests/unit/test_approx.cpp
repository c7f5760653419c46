#include <set>

#include <doctest.h>

#include "../test_util.hpp"
#include "nerve/approx.hpp"
#include "nerve/covariance.hpp"

using namespace nerve;

TEST_CASE("sample counts") {
  CHECK(sample_count(20, 0.05) == 2);
  CHECK(sample_count(100, 0.5) == 50);
  CHECK(sample_count(10, 0.25) == 3);  // 2.5 rounds away from zero
  CHECK(sample_count(6, 1.0) == 6);
  CHECK(sample_count(3, 0.01) == 2);
}

TEST_CASE("plans") {
  const auto full = make_plan(6, 1.0, 99);
  CHECK(full.row_indices == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});

  const auto a = make_plan(100, 0.5, 7);
  const auto b = make_plan(100, 0.5, 7);
  CHECK(a.row_indices == b.row_indices);
  CHECK(a.row_indices.size() == 50);
  CHECK(std::is_sorted(a.row_indices.begin(), a.row_indices.end()));
  CHECK(std::set<std::size_t>(a.row_indices.begin(), a.row_indices.end()).size() == 50);
  CHECK(make_plan(100, 0.5, 8).row_indices != a.row_indices);

  CHECK(make_plan(20, 0.05, 1).row_indices.size() == 2);
  CHECK_ERROR_KIND(make_plan(10, 0.0, 1), ErrorKind::argument);
  CHECK_ERROR_KIND(make_plan(10, 1.5, 1), ErrorKind::argument);
  CHECK_ERROR_KIND(make_plan(1, 1.0, 1), ErrorKind::argument);
}

TEST_CASE("plan values are pinned") {
  // frozen from the first run; guards the portable generator
  const auto p = make_plan(1000, 0.005, 12345);
  CHECK(p.row_indices == std::vector<std::size_t>{120, 331, 346, 348, 867});
}

TEST_CASE("apply_plan") {
  const auto batch = random_batch(1, 4, 3, 1);
  SamplingPlan plan{.fraction = 0.5, .seed = 0, .population = 4, .row_indices = {0, 2}};
  const auto sub = apply_plan(batch, plan);
  CHECK(sub.rows() == 2);
  CHECK(sub.data.row(1) == batch.data.row(2));
  const auto same = apply_plan(batch, make_plan(4, 1.0, 0));
  CHECK(same.data == batch.data);
  CHECK(!same.is_subsampled());
  plan.row_indices = {5};
  CHECK_ERROR_KIND(apply_plan(batch, plan), ErrorKind::argument);
}

TEST_CASE("paired sub-batches share index sets over random plans") {
  const auto pre = random_batch(4, 25, 3, 1);
  const auto post = random_batch(4, 25, 3, 2, Tag::post);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const double fraction = 0.02 + 0.0098 * static_cast<double>(seed);
    const auto plan = make_plan(pre.rows(), fraction, seed);
    const auto a = apply_plan(pre, plan);
    const auto b = apply_plan(post, plan);
    CHECK(a.source_rows == b.source_rows);
    paired_population_check(a, b);
  }
}

TEST_CASE("fidelity arithmetic") {
  MetricRecord exact{.layer = 1, .step = 2, .se_pre = 2.0, .pr_post = 100.0};
  auto approx = exact;
  CHECK(fidelity_report(exact, approx)["se_pre"] == 0.0);
  approx.se_pre = 1.9;
  approx.pr_post = 10.0;
  const auto r = fidelity_report(exact, approx);
  CHECK(r["se_pre"] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(r["pr_post"] == doctest::Approx(90.0).epsilon(1e-12));
  CHECK(r["js"] == 0.0);
  CHECK_ERROR_KIND(r["nope"], ErrorKind::argument);
  approx.step = 3;
  CHECK_ERROR_KIND(fidelity_report(exact, approx), ErrorKind::argument);
  CHECK(metric_value(exact, "pr_gain") == 0.0);
  CHECK_ERROR_KIND(metric_value(exact, "width"), ErrorKind::argument);
}

TEST_CASE("correlation fidelity") {
  std::vector<std::pair<double, double>> s{{1, 2}, {2, 1}, {3, 4}};
  const auto [e, a] = correlation_fidelity(s, s);
  CHECK(e.r == a.r);
  CHECK(e.r == doctest::Approx(0.6546536707079771).epsilon(1e-13));
  std::vector<std::pair<double, double>> anti{{1, 3}, {2, 2}, {3, 1}};
  std::vector<std::pair<double, double>> shuffled{{1, 2}, {2, 3}, {3, 1}};
  const auto [x, y] = correlation_fidelity(anti, shuffled);
  CHECK(x.r == doctest::Approx(-1.0));
  CHECK(std::abs(y.r) < 1.0);
  s.pop_back();
  CHECK_ERROR_KIND(correlation_fidelity(s, anti), ErrorKind::argument);
}
