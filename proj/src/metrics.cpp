#include "nerve/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "nerve/errors.hpp"

namespace nerve {
namespace {

/// Neumaier-compensated running sum.
class Accumulator {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void require_usable(const Eigenspectrum& spec, bool allow_truncated) {
  if (spec.lambdas.empty()) fail(ErrorKind::argument, "empty spectrum");
  if (spec.truncated() && !allow_truncated) {
    fail(ErrorKind::truncated_spectrum, "metric requested on a " + describe_kind(spec) +
                                            " spectrum; pass allow_truncated to opt in");
  }
}

double guarded_log(double x) { return std::log(std::max(x, kEpsilon)); }

/// sum_i p_i log(2 p_i / (p_i + q_i)), with zero-mass terms contributing 0.
double half_js_term(const std::vector<double>& p, const std::vector<double>& q) {
  Accumulator acc;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    acc.add(p[i] * (guarded_log(2.0 * p[i]) - guarded_log(p[i] + q[i])));
  }
  return acc.value();
}

}  // namespace

double spectral_entropy(const Eigenspectrum& spec, bool allow_truncated) {
  require_usable(spec, allow_truncated);
  Accumulator acc;
  for (double p : spec.normalized) {
    if (p <= 0.0) continue;
    acc.add(-p * guarded_log(p));
  }
  const double upper = std::log(static_cast<double>(spec.truncated() ? spec.size() : spec.dim));
  return std::clamp(acc.value(), 0.0, upper);
}

double participation_ratio(const Eigenspectrum& spec, bool allow_truncated) {
  require_usable(spec, allow_truncated);
  // Ratios to the leading eigenvalue keep squares in range and make flat
  // spectra exact.
  const double top = spec.lambdas.front();
  Accumulator sum;
  Accumulator sum_sq;
  for (double v : spec.lambdas) {
    const double s = v / top;
    sum.add(s);
    sum_sq.add(s * s);
  }
  const double pr = sum.value() * sum.value() / std::max(sum_sq.value(), kEpsilon);
  return std::max(pr, 1.0);
}

double eee(const Eigenspectrum& spec, bool allow_truncated) {
  require_usable(spec, allow_truncated);
  const std::size_t d = spec.truncated() ? spec.size() : spec.dim;
  const double total = std::max(spec.total, kEpsilon);
  Accumulator cumulative;
  Accumulator excess;
  for (std::size_t k = 1; k <= d; ++k) {
    if (k <= spec.size()) cumulative.add(spec.lambdas[k - 1]);
    excess.add(cumulative.value() / total - static_cast<double>(k) / static_cast<double>(d));
  }
  const double value = 2.0 * excess.value() / static_cast<double>(d);
  return std::max(value, 0.0);
}

double js_divergence(const Eigenspectrum& pre, const Eigenspectrum& post, bool allow_truncated) {
  require_usable(pre, allow_truncated);
  require_usable(post, allow_truncated);
  if (pre.size() != post.size() || pre.dim != post.dim) {
    fail(ErrorKind::argument, "JS needs spectra of identical dimension (" + std::to_string(pre.size()) + " vs " +
                                  std::to_string(post.size()) + ")");
  }
  // Each half is computed from its own side; p_i + q_i is commutative, so swapping arguments is exact.
  const double a = half_js_term(pre.normalized, post.normalized);
  const double b = half_js_term(post.normalized, pre.normalized);
  const double js = 0.5 * a + 0.5 * b;
  return std::clamp(js, 0.0, std::log(2.0));
}

double pr_gain(const Eigenspectrum& pre, const Eigenspectrum& post, bool allow_truncated) {
  return participation_ratio(post, allow_truncated) / participation_ratio(pre, allow_truncated);
}

double delta_eee(const Eigenspectrum& pre, const Eigenspectrum& post, bool allow_truncated) {
  return eee(post, allow_truncated) - eee(pre, allow_truncated);
}

MetricRecord compute_record(std::uint32_t layer, std::uint64_t step, const Eigenspectrum& pre,
                            const Eigenspectrum& post, bool allow_truncated) {
  MetricRecord rec;
  rec.layer = layer;
  rec.step = step;
  rec.se_pre = spectral_entropy(pre, allow_truncated);
  rec.se_post = spectral_entropy(post, allow_truncated);
  rec.pr_pre = participation_ratio(pre, allow_truncated);
  rec.pr_post = participation_ratio(post, allow_truncated);
  rec.eee_pre = eee(pre, allow_truncated);
  rec.eee_post = eee(post, allow_truncated);
  rec.js = js_divergence(pre, post, allow_truncated);
  rec.pr_gain = rec.pr_post / rec.pr_pre;
  rec.delta_eee = rec.eee_post - rec.eee_pre;
  if (pre.truncated() || post.truncated()) rec.spectrum = describe_kind(pre.truncated() ? pre : post);
  return rec;
}

}  // namespace nerve
