#include "nerve/approx.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nerve/eigensolve.hpp"
#include "nerve/errors.hpp"
#include "nerve/rng.hpp"

namespace nerve {

std::size_t sample_count(std::size_t n, double fraction) {
  const auto rounded = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return std::min(n, std::max<std::size_t>(2, rounded));
}

SamplingPlan make_plan(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    fail(ErrorKind::argument, "sampling fraction must be in (0, 1], got " + std::to_string(fraction));
  }
  if (n < 2) fail(ErrorKind::argument, "sampling needs a population of at least 2 tokens");

  SamplingPlan plan;
  plan.fraction = fraction;
  plan.seed = seed;
  plan.population = n;
  const std::size_t count = sample_count(n, fraction);

  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  if (count < n) {
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
  }
  plan.row_indices = std::move(pool);
  return plan;
}

ActivationBatch apply_plan(const ActivationBatch& batch, const SamplingPlan& plan) {
  if (!plan.row_indices.empty() && plan.row_indices.back() >= batch.rows()) {
    fail(ErrorKind::argument, "plan index " + std::to_string(plan.row_indices.back()) + " out of range for " +
                                  std::to_string(batch.rows()) + "-row batch");
  }
  return select_rows(batch, plan.row_indices);
}

double metric_value(const MetricRecord& rec, std::string_view metric) {
  if (metric == "se_pre") return rec.se_pre;
  if (metric == "se_post") return rec.se_post;
  if (metric == "pr_pre") return rec.pr_pre;
  if (metric == "pr_post") return rec.pr_post;
  if (metric == "eee_pre") return rec.eee_pre;
  if (metric == "eee_post") return rec.eee_post;
  if (metric == "js") return rec.js;
  if (metric == "pr_gain") return rec.pr_gain;
  if (metric == "delta_eee") return rec.delta_eee;
  fail(ErrorKind::argument, "unknown metric '" + std::string(metric) + "'");
}

double FidelityReport::operator[](std::string_view metric) const {
  for (std::size_t i = 0; i < kFidelityMetrics.size(); ++i) {
    if (kFidelityMetrics[i] == metric) return percent_error[i];
  }
  fail(ErrorKind::argument, "unknown fidelity metric '" + std::string(metric) + "'");
}

FidelityReport fidelity_report(const MetricRecord& exact, const MetricRecord& approx) {
  if (exact.layer != approx.layer || exact.step != approx.step) {
    fail(ErrorKind::argument, "fidelity report compares different cells (layer " + std::to_string(exact.layer) +
                                  " step " + std::to_string(exact.step) + " vs layer " + std::to_string(approx.layer) +
                                  " step " + std::to_string(approx.step) + ")");
  }
  FidelityReport report;
  report.layer = exact.layer;
  report.step = exact.step;
  for (std::size_t i = 0; i < kFidelityMetrics.size(); ++i) {
    const double e = metric_value(exact, kFidelityMetrics[i]);
    const double a = metric_value(approx, kFidelityMetrics[i]);
    report.percent_error[i] = 100.0 * std::abs(a - e) / std::max(std::abs(e), kEpsilon);
  }
  return report;
}

std::pair<CorrelationResult, CorrelationResult> correlation_fidelity(
    const std::vector<std::pair<double, double>>& exact_series,
    const std::vector<std::pair<double, double>>& approx_series) {
  if (exact_series.size() != approx_series.size()) {
    fail(ErrorKind::argument, "exact and approximate series differ in length");
  }
  auto run = [](const std::vector<std::pair<double, double>>& series) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [metric, loss] : series) {
      xs.push_back(metric);
      ys.push_back(loss);
    }
    return pearson(xs, ys);
  };
  return {run(exact_series), run(approx_series)};
}

}  // namespace nerve
