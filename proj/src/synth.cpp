#include "nerve/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>

#include <Eigen/QR>

#include "nerve/errors.hpp"
#include "nerve/rng.hpp"

namespace nerve {
namespace {

double parse_real(std::string_view text, std::string_view what) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    fail(ErrorKind::argument, "bad " + std::string(what) + " '" + s + "'");
  }
  return v;
}

}  // namespace

SpectrumSpec SpectrumSpec::uniform(std::size_t d, std::size_t m, double scale) {
  SpectrumSpec s;
  s.family = SpectrumFamily::uniform_over_m;
  s.d = d;
  s.m = m;
  s.scale = scale;
  return s;
}

SpectrumSpec SpectrumSpec::one_hot(std::size_t d, double scale) {
  SpectrumSpec s;
  s.family = SpectrumFamily::one_hot;
  s.d = d;
  s.scale = scale;
  return s;
}

SpectrumSpec SpectrumSpec::geometric(std::size_t d, double ratio, double scale) {
  SpectrumSpec s;
  s.family = SpectrumFamily::geometric;
  s.d = d;
  s.ratio = ratio;
  s.scale = scale;
  return s;
}

SpectrumSpec SpectrumSpec::linear(std::size_t d, double scale) {
  SpectrumSpec s;
  s.family = SpectrumFamily::linear_decay;
  s.d = d;
  s.scale = scale;
  return s;
}

SpectrumSpec SpectrumSpec::explicit_values(std::vector<double> values, std::size_t d, double scale) {
  SpectrumSpec s;
  s.family = SpectrumFamily::explicit_values;
  s.d = d;
  s.values = std::move(values);
  s.scale = scale;
  return s;
}

SpectrumSpec parse_spectrum_spec(std::string_view text, std::size_t d, double scale) {
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

  if (name == "uniform") {
    const std::size_t m = arg.empty() ? d : static_cast<std::size_t>(parse_real(arg, "uniform width"));
    return SpectrumSpec::uniform(d, m, scale);
  }
  if (name == "one_hot") return SpectrumSpec::one_hot(d, scale);
  if (name == "geometric") return SpectrumSpec::geometric(d, parse_real(arg, "geometric ratio"), scale);
  if (name == "linear") return SpectrumSpec::linear(d, scale);
  if (name == "explicit") {
    std::vector<double> values;
    std::string item;
    std::istringstream ss{std::string(arg)};
    while (std::getline(ss, item, ';')) values.push_back(parse_real(item, "explicit value"));
    return SpectrumSpec::explicit_values(std::move(values), d, scale);
  }
  fail(ErrorKind::argument, "unknown spectrum family '" + std::string(text) + "'");
}

Eigenspectrum generate_spectrum(const SpectrumSpec& spec) {
  const std::size_t d = spec.d;
  if (d == 0) fail(ErrorKind::argument, "spectrum dimension must be >= 1");
  if (!(spec.scale > 0.0) || !std::isfinite(spec.scale)) fail(ErrorKind::argument, "spectrum scale must be positive");

  std::vector<double> values(d, 0.0);
  switch (spec.family) {
    case SpectrumFamily::uniform_over_m:
      if (spec.m < 1 || spec.m > d) fail(ErrorKind::argument, "uniform_over_m needs 1 <= m <= d");
      std::fill(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(spec.m), spec.scale);
      break;
    case SpectrumFamily::one_hot:
      values[0] = spec.scale;
      break;
    case SpectrumFamily::geometric:
      if (!(spec.ratio > 0.0 && spec.ratio < 1.0)) fail(ErrorKind::argument, "geometric ratio must be in (0, 1)");
      for (std::size_t i = 0; i < d; ++i) values[i] = spec.scale * std::pow(spec.ratio, static_cast<double>(i));
      break;
    case SpectrumFamily::linear_decay:
      for (std::size_t i = 0; i < d; ++i) {
        values[i] = spec.scale * static_cast<double>(d - i) / static_cast<double>(d);
      }
      break;
    case SpectrumFamily::explicit_values: {
      if (spec.values.empty() || spec.values.size() > d) {
        fail(ErrorKind::argument, "explicit spectrum needs between 1 and d values");
      }
      for (double v : spec.values) {
        if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorKind::argument, "explicit spectrum values must be >= 0");
      }
      std::vector<double> sorted = spec.values;
      std::sort(sorted.begin(), sorted.end(), std::greater<>());
      for (std::size_t i = 0; i < sorted.size(); ++i) values[i] = spec.scale * sorted[i];
      break;
    }
  }
  return make_spectrum(std::move(values), d);
}

Eigen::MatrixXd random_orthogonal(std::size_t d, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(d);
  Rng rng(seed);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd& r = qr.matrixQR();
  // Fix column signs so the distribution is Haar rather than QR-biased.
  for (Eigen::Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

ActivationBatch sample_gaussian_batch(const SpectrumSpec& spec, const DumpHeader& header, std::uint64_t seed) {
  const Eigenspectrum population = generate_spectrum(spec);
  DumpHeader h = header;
  h.feature_dim = static_cast<std::uint32_t>(spec.d);
  const std::size_t n = h.tokens();
  if (n < 10 * spec.d) {
    fail(ErrorKind::argument, "need at least 10*d = " + std::to_string(10 * spec.d) + " tokens, got " +
                                  std::to_string(n));
  }
  const auto d = static_cast<Eigen::Index>(spec.d);
  const Eigen::MatrixXd basis = random_orthogonal(spec.d, derive_seed(seed, 0));
  Eigen::VectorXd stddev(d);
  for (Eigen::Index i = 0; i < d; ++i) stddev[i] = std::sqrt(population.lambdas[static_cast<std::size_t>(i)]);

  Rng rng(derive_seed(seed, 1));
  RowMatrix z(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    for (Eigen::Index c = 0; c < d; ++c) z(r, c) = rng.normal() * stddev[c];
  }
  RowMatrix data = z * basis.transpose();
  if (h.dtype == DType::float32) data = data.cast<float>().cast<double>();
  return make_batch(h, std::move(data));
}

ActivationBatch sample_gaussian_batch(const SpectrumSpec& spec, std::size_t n, std::uint64_t seed) {
  DumpHeader h;
  h.dtype = DType::float64;
  h.batch = 1;
  h.seq_len = static_cast<std::uint32_t>(n);
  return sample_gaussian_batch(spec, h, seed);
}

}  // namespace nerve
