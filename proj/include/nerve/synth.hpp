#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "nerve/eigensolve.hpp"
#include "nerve/ingest.hpp"

namespace nerve {

enum class SpectrumFamily { uniform_over_m, one_hot, geometric, linear_decay, explicit_values };

struct SpectrumSpec {
  SpectrumFamily family = SpectrumFamily::one_hot;
  std::size_t d = 1;
  double scale = 1.0;
  std::size_t m = 1;           // uniform_over_m
  double ratio = 0.5;          // geometric
  std::vector<double> values;  // explicit_values (sorted descending on use, zero-padded to d)

  static SpectrumSpec uniform(std::size_t d, std::size_t m, double scale = 1.0);
  static SpectrumSpec one_hot(std::size_t d, double scale = 1.0);
  static SpectrumSpec geometric(std::size_t d, double ratio, double scale = 1.0);
  static SpectrumSpec linear(std::size_t d, double scale = 1.0);
  static SpectrumSpec explicit_values(std::vector<double> values, std::size_t d, double scale = 1.0);
};

/// Parses "uniform" (m = d), "uniform:<m>", "one_hot", "geometric:<ratio>",
/// "linear", or "explicit:<v1>;<v2>;...".
SpectrumSpec parse_spectrum_spec(std::string_view text, std::size_t d, double scale = 1.0);

Eigenspectrum generate_spectrum(const SpectrumSpec& spec);

/// Haar-distributed d x d orthogonal matrix from a seeded Gaussian QR.
Eigen::MatrixXd random_orthogonal(std::size_t d, std::uint64_t seed);

/// Zero-mean Gaussian tokens whose population covariance is
/// Q diag(spectrum) Q^T for a seeded random orthogonal Q. `header` fixes
/// B, S, layer, step, tag and dtype (feature_dim is overwritten with
/// spec.d); values are rounded to float32 when the dtype asks for it.
/// Requires B*S >= 10 d.
ActivationBatch sample_gaussian_batch(const SpectrumSpec& spec, const DumpHeader& header, std::uint64_t seed);

/// Single-sequence convenience form: B = 1, S = n, float64.
ActivationBatch sample_gaussian_batch(const SpectrumSpec& spec, std::size_t n, std::uint64_t seed);

}  // namespace nerve
