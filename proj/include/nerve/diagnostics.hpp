#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "nerve/metrics.hpp"

namespace nerve {

/// Bands separating the four regimes of nonlinear restructuring. The
/// defaults are conventions, chosen well inside the separations observed in
/// practice; all are overridable from the CLI.
struct RegimeThresholds {
  double js_high = 0.1;
  double js_zero = 0.01;
  double pr_gain_high = 5.0;
  double pr_gain_moderate = 2.0;
  double deee_strong_neg = -0.1;
  double deee_weak_band = 0.02;

  /// Throws argument error unless js_zero < js_high, pr_gain_moderate <
  /// pr_gain_high, deee_strong_neg < 0 and deee_weak_band > 0.
  void validate() const;
};

enum class RegimeLabel {
  beneficial_restructuring,
  compensatory_repair,
  expansion_without_equalization,
  spectral_inertia,
  unclassified,
};

std::string_view to_string(RegimeLabel label);

/// First matching rule wins:
///  1. js >= js_high, pr_gain >= pr_gain_high, delta_eee <= deee_strong_neg -> beneficial_restructuring
///  2. js >= js_high, pr_gain >= pr_gain_high, delta_eee >  deee_strong_neg -> compensatory_repair
///  3. js <  js_high, pr_gain >= pr_gain_high, |delta_eee| <= band or delta_eee > 0 -> expansion_without_equalization
///  4. js <= js_zero, |delta_eee| <= band -> spectral_inertia
///  otherwise unclassified.
RegimeLabel classify_regime(const MetricRecord& rec, const RegimeThresholds& th = {});

enum class Trend { up, down, flat };

std::string_view to_string(Trend trend);

/// Per-metric trends, in the order SE, PR, EEE, JS.
using TrendTuple = std::array<Trend, 4>;

inline constexpr std::string_view kHealthyFlattening = "healthy spectral flattening";
inline constexpr std::string_view kSpectralCollapse = "spectral collapse";
inline constexpr std::string_view kNoMatch = "no match";

/// Joint-signature lookup over per-record trends. SE up, PR up, EEE down
/// reads as healthy flattening (rank inflation); SE down, PR down, EEE up
/// as spectral collapse. JS is not constrained by either. Depth-profile
/// signatures are not matched here.
std::string_view match_signature(const TrendTuple& trends);

struct CorrelationResult {
  std::string metric_name;
  double r = 0.0;
  std::size_t n_points = 0;
};

/// Sample Pearson correlation. Needs equal lengths >= 3 and non-constant
/// series (undefined_correlation otherwise).
CorrelationResult pearson(const std::vector<double>& xs, const std::vector<double>& ys,
                          std::string metric_name = {});

/// pr_post / d_ffn, requiring 1 <= pr_post <= d_ffn.
double width_utilization(double pr_post, std::size_t d_ffn);

/// Least-squares slope over the trailing `window` points compared with
/// +/- slope_tol.
Trend trend_of(const std::vector<double>& series, std::size_t window, double slope_tol = 1e-3);

/// Slope used by trend_of, exposed for reporting.
double trailing_slope(const std::vector<double>& series, std::size_t window);

}  // namespace nerve
