#include "nerve/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "nerve/errors.hpp"
#include "nerve/rng.hpp"

namespace nerve {
namespace {

void check_square(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) {
    fail(ErrorKind::argument, "covariance must be a non-empty square matrix");
  }
}

void check_rank(std::size_t k, Eigen::Index d) {
  if (k < 1 || k > static_cast<std::size_t>(d)) {
    fail(ErrorKind::argument, "rank k=" + std::to_string(k) + " must be in [1, D=" + std::to_string(d) + "]");
  }
}

/// Sorts descending and clamps round-off negatives; values more negative
/// than the clamp tolerance are an error.
std::vector<double> clean_eigenvalues(std::vector<double> values) {
  std::sort(values.begin(), values.end(), std::greater<>());
  const double top = values.empty() ? 0.0 : values.front();
  if (!(top > 0.0)) fail(ErrorKind::degenerate_spectrum, "largest eigenvalue is not positive");
  for (double& v : values) {
    if (v < 0.0) {
      if (v < -kNegativeClampTol * top) {
        fail(ErrorKind::non_psd, "eigenvalue " + std::to_string(v) + " below -tol * lambda_max (lambda_max = " +
                                     std::to_string(top) + ")");
      }
      v = 0.0;
    }
  }
  return values;
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

}  // namespace

std::string describe_kind(const Eigenspectrum& spec) {
  switch (spec.kind) {
    case SpectrumKind::full: return "full";
    case SpectrumKind::randsvd: return "randsvd(" + std::to_string(spec.size()) + ")";
    case SpectrumKind::lanczos: return "lanczos(" + std::to_string(spec.size()) + ")";
  }
  return "unknown";
}

Eigenspectrum make_spectrum(std::vector<double> descending, std::size_t dim, SpectrumKind kind) {
  if (descending.empty()) fail(ErrorKind::argument, "spectrum must have at least one value");
  if (descending.size() > dim) fail(ErrorKind::argument, "spectrum longer than its ambient dimension");
  for (std::size_t i = 0; i < descending.size(); ++i) {
    if (!std::isfinite(descending[i]) || descending[i] < 0.0) {
      fail(ErrorKind::argument, "spectrum values must be finite and non-negative");
    }
    if (i > 0 && descending[i] > descending[i - 1]) fail(ErrorKind::argument, "spectrum must be sorted descending");
  }
  const double total = std::accumulate(descending.begin(), descending.end(), 0.0);
  if (!(total > 0.0)) fail(ErrorKind::degenerate_spectrum, "spectrum has zero total variance");

  Eigenspectrum spec;
  spec.total = total;
  spec.dim = dim;
  spec.kind = kind;
  const double denom = std::max(total, kEpsilon);
  spec.normalized.reserve(descending.size());
  for (double v : descending) spec.normalized.push_back(v / denom);
  spec.lambdas = std::move(descending);
  return spec;
}

Eigenspectrum eig_full(const Eigen::MatrixXd& cov) {
  check_square(cov);
  const double trace = cov.trace();
  if (!(trace > 0.0)) fail(ErrorKind::degenerate_spectrum, "covariance trace is not positive");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) fail(ErrorKind::data, "symmetric eigensolver did not converge");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  std::vector<double> values(ev.data(), ev.data() + ev.size());
  return make_spectrum(clean_eigenvalues(std::move(values)), static_cast<std::size_t>(cov.rows()));
}

Eigenspectrum eig_full(const CovarianceSummary& cov) { return eig_full(cov.cov()); }

Eigenspectrum eig_randsvd(const Eigen::MatrixXd& cov, const RandSvdOptions& options) {
  check_square(cov);
  const Eigen::Index d = cov.rows();
  check_rank(options.k, d);
  const auto width = static_cast<Eigen::Index>(std::min<std::size_t>(options.k + options.oversample,
                                                                     static_cast<std::size_t>(d)));

  Eigen::MatrixXd q = orthonormal_basis(cov * gaussian_matrix(d, width, options.seed));
  for (std::size_t it = 0; it < options.power_iters; ++it) {
    // One power iteration applies A A^T = A^2 for symmetric A; re-orthonormalize after each product.
    q = orthonormal_basis(cov * q);
    q = orthonormal_basis(cov * q);
  }
  const Eigen::MatrixXd projected = q.transpose() * cov;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(projected);
  const Eigen::VectorXd& sigma = svd.singularValues();

  std::vector<double> values(sigma.data(), sigma.data() + std::min<Eigen::Index>(sigma.size(), options.k));
  return make_spectrum(clean_eigenvalues(std::move(values)), static_cast<std::size_t>(d), SpectrumKind::randsvd);
}

Eigenspectrum eig_randsvd(const CovarianceSummary& cov, std::size_t k, std::size_t oversample, std::size_t power_iters,
                          std::uint64_t seed) {
  return eig_randsvd(cov.cov(), RandSvdOptions{k, oversample, power_iters, seed});
}

Eigenspectrum eig_lanczos(const Eigen::MatrixXd& cov, const LanczosOptions& options) {
  check_square(cov);
  const Eigen::Index d = cov.rows();
  const std::size_t k = options.k;
  check_rank(k, d);
  std::size_t max_iters = options.max_iters;
  if (max_iters == 0) max_iters = std::max<std::size_t>(2 * k, k + 32);
  if (max_iters < k) {
    fail(ErrorKind::argument, "max_iters=" + std::to_string(max_iters) + " must be >= k=" + std::to_string(k));
  }
  const auto steps = static_cast<Eigen::Index>(std::min<std::size_t>(max_iters, static_cast<std::size_t>(d)));

  Eigen::MatrixXd basis(d, steps);
  Eigen::VectorXd v = gaussian_matrix(d, 1, options.seed).col(0);
  v.normalize();
  basis.col(0) = v;

  std::vector<double> alpha;
  std::vector<double> beta;
  double scale = 0.0;
  std::size_t restarts = 0;

  auto ritz = [&](bool with_vectors) {
    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(beta.data(), m - 1))
                                : Eigen::VectorXd();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    return tri;
  };

  for (Eigen::Index j = 0; j < steps; ++j) {
    Eigen::VectorXd w = cov * basis.col(j);
    const double a = basis.col(j).dot(w);
    alpha.push_back(a);
    w -= a * basis.col(j);
    if (j > 0) w -= beta.back() * basis.col(j - 1);
    // Classical Gram-Schmidt against the whole basis, applied twice.
    for (int pass = 0; pass < 2; ++pass) {
      const auto prior = basis.leftCols(j + 1);
      w -= prior * (prior.transpose() * w);
    }
    const double b = w.norm();
    scale = std::max(scale, std::abs(a) + b + (beta.empty() ? 0.0 : beta.back()));
    if (j + 1 == steps) break;
    if (b <= 1e-12 * scale) {
      // Invariant subspace: continue from a fresh direction orthogonal to it.
      // T becomes block diagonal, so the off-diagonal entry is zero.
      const auto prior = basis.leftCols(j + 1);
      Eigen::VectorXd fresh = gaussian_matrix(d, 1, derive_seed(options.seed, ++restarts)).col(0);
      for (int pass = 0; pass < 2; ++pass) fresh -= prior * (prior.transpose() * fresh);
      const double n = fresh.norm();
      if (n <= 1e-8) break;
      beta.push_back(0.0);
      basis.col(j + 1) = fresh / n;
      continue;
    }
    beta.push_back(b);
    basis.col(j + 1) = w / b;

    // Early exit once the top-k Ritz pairs have tiny residuals |b * s_last|.
    const std::size_t m = alpha.size();
    if (m >= k && m % 8 == 0) {
      auto tri = ritz(true);
      const auto& vecs = tri.eigenvectors();
      const auto last = static_cast<Eigen::Index>(m) - 1;
      bool converged = true;
      for (std::size_t i = 0; i < k && converged; ++i) {
        const Eigen::Index col = last - static_cast<Eigen::Index>(i);
        converged = std::abs(b * vecs(last, col)) <= options.tolerance * std::max(scale, kEpsilon);
      }
      if (converged) break;
    }
  }

  const auto tri = ritz(false);
  const Eigen::VectorXd& theta = tri.eigenvalues();
  std::vector<double> values(theta.data(), theta.data() + theta.size());
  values = clean_eigenvalues(std::move(values));
  if (values.size() > k) values.resize(k);
  auto spec = make_spectrum(std::move(values), static_cast<std::size_t>(d), SpectrumKind::lanczos);
  spec.breakdowns = restarts;
  return spec;
}

Eigenspectrum eig_lanczos(const CovarianceSummary& cov, std::size_t k, std::size_t max_iters, std::uint64_t seed) {
  return eig_lanczos(cov.cov(), LanczosOptions{k, max_iters, seed});
}

}  // namespace nerve
