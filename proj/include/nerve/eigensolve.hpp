#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nerve/covariance.hpp"

namespace nerve {

enum class SpectrumKind { full, randsvd, lanczos };

/// Descending, non-negative eigenvalues of one covariance matrix.
///
/// For approximate kinds `lambdas` holds the top-k estimates and `dim`
/// still records the ambient dimension D. `normalized` is always relative
/// to the values present; approximate spectra are never rescaled as if
/// they covered all D modes.
struct Eigenspectrum {
  std::vector<double> lambdas;
  std::vector<double> normalized;
  double total = 0.0;
  std::size_t dim = 0;
  SpectrumKind kind = SpectrumKind::full;
  /// Lanczos only: number of invariant subspaces hit, each followed by a
  /// restart from a random direction orthogonal to the basis so far.
  std::size_t breakdowns = 0;

  std::size_t size() const { return lambdas.size(); }
  bool truncated() const { return kind != SpectrumKind::full; }
};

/// Guard used in denominators and logs throughout the metrics.
inline constexpr double kEpsilon = 1e-12;
/// Eigenvalues in [-kNegativeClampTol * lambda_max, 0) are round-off and
/// clamp to zero; anything more negative is rejected.
inline constexpr double kNegativeClampTol = 1e-10;

/// "full", "randsvd(k)" or "lanczos(k)".
std::string describe_kind(const Eigenspectrum& spec);

/// Builds a spectrum from values that are already non-negative and sorted
/// descending; validates and normalizes. Throws degenerate_spectrum when the
/// total is not positive.
Eigenspectrum make_spectrum(std::vector<double> descending, std::size_t dim, SpectrumKind kind = SpectrumKind::full);

Eigenspectrum eig_full(const Eigen::MatrixXd& cov);
Eigenspectrum eig_full(const CovarianceSummary& cov);

struct RandSvdOptions {
  std::size_t k = 0;
  std::size_t oversample = 10;
  std::size_t power_iters = 2;
  std::uint64_t seed = 0;
};

/// Top-k spectrum from a randomized range finder with subspace (power)
/// iterations, followed by an SVD of the projected block.
Eigenspectrum eig_randsvd(const Eigen::MatrixXd& cov, const RandSvdOptions& options);
Eigenspectrum eig_randsvd(const CovarianceSummary& cov, std::size_t k, std::size_t oversample = 10,
                          std::size_t power_iters = 2, std::uint64_t seed = 0);

struct LanczosOptions {
  std::size_t k = 0;
  std::size_t max_iters = 0;  // 0 = min(D, max(2k, k + 32))
  std::uint64_t seed = 0;
  double tolerance = 1e-12;   // relative Ritz residual for early exit
};

/// Top-k Ritz values of a Lanczos run with full reorthogonalization.
Eigenspectrum eig_lanczos(const Eigen::MatrixXd& cov, const LanczosOptions& options);
Eigenspectrum eig_lanczos(const CovarianceSummary& cov, std::size_t k, std::size_t max_iters, std::uint64_t seed = 0);

}  // namespace nerve
