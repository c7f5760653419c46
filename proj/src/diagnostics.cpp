#include "nerve/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "nerve/errors.hpp"

namespace nerve {

void RegimeThresholds::validate() const {
  if (!(js_zero < js_high)) fail(ErrorKind::argument, "thresholds: js_zero must be < js_high");
  if (!(pr_gain_moderate < pr_gain_high)) fail(ErrorKind::argument, "thresholds: pr_gain_moderate must be < pr_gain_high");
  if (!(deee_strong_neg < 0.0)) fail(ErrorKind::argument, "thresholds: deee_strong_neg must be < 0");
  if (!(deee_weak_band > 0.0)) fail(ErrorKind::argument, "thresholds: deee_weak_band must be > 0");
}

std::string_view to_string(RegimeLabel label) {
  switch (label) {
    case RegimeLabel::beneficial_restructuring: return "beneficial_restructuring";
    case RegimeLabel::compensatory_repair: return "compensatory_repair";
    case RegimeLabel::expansion_without_equalization: return "expansion_without_equalization";
    case RegimeLabel::spectral_inertia: return "spectral_inertia";
    case RegimeLabel::unclassified: return "unclassified";
  }
  return "unclassified";
}

RegimeLabel classify_regime(const MetricRecord& rec, const RegimeThresholds& th) {
  if (!std::isfinite(rec.js) || !std::isfinite(rec.pr_gain) || !std::isfinite(rec.delta_eee)) {
    fail(ErrorKind::data, "regime classification needs finite js, pr_gain and delta_eee (layer " +
                              std::to_string(rec.layer) + ", step " + std::to_string(rec.step) + ")");
  }
  const bool js_high = rec.js >= th.js_high;
  const bool gain_high = rec.pr_gain >= th.pr_gain_high;
  const bool deee_weak = std::abs(rec.delta_eee) <= th.deee_weak_band;

  if (js_high && gain_high) {
    return rec.delta_eee <= th.deee_strong_neg ? RegimeLabel::beneficial_restructuring
                                               : RegimeLabel::compensatory_repair;
  }
  if (!js_high && gain_high && (deee_weak || rec.delta_eee > 0.0)) return RegimeLabel::expansion_without_equalization;
  if (rec.js <= th.js_zero && deee_weak) return RegimeLabel::spectral_inertia;
  return RegimeLabel::unclassified;
}

std::string_view to_string(Trend trend) {
  switch (trend) {
    case Trend::up: return "up";
    case Trend::down: return "down";
    case Trend::flat: return "flat";
  }
  return "flat";
}

std::string_view match_signature(const TrendTuple& trends) {
  const auto [se, pr, e, js] = trends;
  (void)js;
  if (se == Trend::up && pr == Trend::up && e == Trend::down) return kHealthyFlattening;
  if (se == Trend::down && pr == Trend::down && e == Trend::up) return kSpectralCollapse;
  return kNoMatch;
}

CorrelationResult pearson(const std::vector<double>& xs, const std::vector<double>& ys, std::string metric_name) {
  if (xs.size() != ys.size()) {
    fail(ErrorKind::argument, "pearson: series lengths differ (" + std::to_string(xs.size()) + " vs " +
                                  std::to_string(ys.size()) + ")");
  }
  if (xs.size() < 3) fail(ErrorKind::argument, "pearson: need at least 3 points, got " + std::to_string(xs.size()));
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    fail(ErrorKind::undefined_correlation, "pearson: constant series" +
                                               (metric_name.empty() ? std::string{} : " for " + metric_name));
  }
  CorrelationResult out;
  out.metric_name = std::move(metric_name);
  out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  out.n_points = xs.size();
  return out;
}

double width_utilization(double pr_post, std::size_t d_ffn) {
  if (d_ffn == 0) fail(ErrorKind::argument, "FFN width must be >= 1");
  if (!(pr_post >= 1.0) || pr_post > static_cast<double>(d_ffn)) {
    fail(ErrorKind::argument, "participation ratio " + std::to_string(pr_post) + " outside [1, " +
                                  std::to_string(d_ffn) + "]");
  }
  return pr_post / static_cast<double>(d_ffn);
}

double trailing_slope(const std::vector<double>& series, std::size_t window) {
  if (window < 2 || series.size() < window) {
    fail(ErrorKind::argument, "trend needs length >= window >= 2 (length " + std::to_string(series.size()) +
                                  ", window " + std::to_string(window) + ")");
  }
  const std::size_t start = series.size() - window;
  const double w = static_cast<double>(window);
  const double mean_t = (w - 1.0) / 2.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < window; ++i) mean_y += series[start + i];
  mean_y /= w;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < window; ++i) {
    const double dt = static_cast<double>(i) - mean_t;
    num += dt * (series[start + i] - mean_y);
    den += dt * dt;
  }
  return num / den;
}

Trend trend_of(const std::vector<double>& series, std::size_t window, double slope_tol) {
  const double slope = trailing_slope(series, window);
  if (slope > slope_tol) return Trend::up;
  if (slope < -slope_tol) return Trend::down;
  return Trend::flat;
}

}  // namespace nerve
