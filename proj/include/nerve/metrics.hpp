#pragma once

#include <cstdint>
#include <string>

#include "nerve/eigensolve.hpp"

namespace nerve {

// Eigenspectrum metrics. All logarithms are natural. Metrics reject
// truncated (top-k) spectra unless `allow_truncated` is set; a truncated
// spectrum is then treated as a complete distribution over its k values.

/// Shannon entropy of the normalized eigenvalues, in nats; in [0, ln D].
double spectral_entropy(const Eigenspectrum& spec, bool allow_truncated = false);

/// (sum lambda)^2 / sum lambda^2; in [1, D].
double participation_ratio(const Eigenspectrum& spec, bool allow_truncated = false);

/// Eigenvalue early enrichment: 2/D * sum_k (cumulative share of the top k
/// eigenvalues - k/D). 0 for a flat spectrum, (D-1)/D for a single mode.
double eee(const Eigenspectrum& spec, bool allow_truncated = false);

/// Jensen-Shannon divergence between two normalized spectra, midpoint form;
/// in [0, ln 2] and exactly symmetric.
double js_divergence(const Eigenspectrum& pre, const Eigenspectrum& post, bool allow_truncated = false);

double pr_gain(const Eigenspectrum& pre, const Eigenspectrum& post, bool allow_truncated = false);
double delta_eee(const Eigenspectrum& pre, const Eigenspectrum& post, bool allow_truncated = false);

struct MetricRecord {
  std::uint32_t layer = 0;
  std::uint64_t step = 0;
  double se_pre = 0.0;
  double se_post = 0.0;
  double pr_pre = 0.0;
  double pr_post = 0.0;
  double eee_pre = 0.0;
  double eee_post = 0.0;
  double js = 0.0;
  double pr_gain = 0.0;
  double delta_eee = 0.0;
  /// "full", or the approximate kind (e.g. "lanczos(256)") when computed on truncated spectra.
  std::string spectrum = "full";

  bool truncated() const { return spectrum != "full"; }
};

MetricRecord compute_record(std::uint32_t layer, std::uint64_t step, const Eigenspectrum& pre,
                            const Eigenspectrum& post, bool allow_truncated = false);

}  // namespace nerve
