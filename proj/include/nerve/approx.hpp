#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "nerve/diagnostics.hpp"
#include "nerve/ingest.hpp"
#include "nerve/metrics.hpp"

namespace nerve {

/// Uniform without-replacement token subset. The selection uses a partial
/// Fisher-Yates shuffle driven by Rng (mt19937_64 plus a local bounded
/// draw), so identical (n, fraction, seed) give identical plans everywhere.
struct SamplingPlan {
  double fraction = 1.0;
  std::uint64_t seed = 0;
  std::size_t population = 0;
  std::vector<std::size_t> row_indices;  // sorted ascending
};

/// max(2, round(fraction * n)) capped at n; round half away from zero.
std::size_t sample_count(std::size_t n, double fraction);

SamplingPlan make_plan(std::size_t n, double fraction, std::uint64_t seed);

/// Rows of the plan, ascending, with position and source-row metadata kept.
ActivationBatch apply_plan(const ActivationBatch& batch, const SamplingPlan& plan);

/// Metrics compared in a fidelity report, in output order.
inline constexpr std::array<std::string_view, 7> kFidelityMetrics{"se_pre",  "se_post", "pr_pre", "pr_post",
                                                                  "eee_pre", "eee_post", "js"};

double metric_value(const MetricRecord& rec, std::string_view metric);

struct FidelityReport {
  std::uint32_t layer = 0;
  std::uint64_t step = 0;
  /// Percent errors, indexed like kFidelityMetrics.
  std::array<double, kFidelityMetrics.size()> percent_error{};

  double operator[](std::string_view metric) const;
};

/// 100 * |approx - exact| / max(|exact|, eps) for every metric in kFidelityMetrics.
FidelityReport fidelity_report(const MetricRecord& exact, const MetricRecord& approx);

/// Pearson r of (metric, loss) pairs for the exact and the approximate run.
std::pair<CorrelationResult, CorrelationResult> correlation_fidelity(
    const std::vector<std::pair<double, double>>& exact_series,
    const std::vector<std::pair<double, double>>& approx_series);

}  // namespace nerve
