#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

#include "nerve/ingest.hpp"
#include "nerve/storage_probe.hpp"

namespace nerve {

struct CovarianceMeta {
  std::uint32_t layer = 0;
  std::uint64_t step = 0;
  Tag tag = Tag::pre;
};

struct AccumulatorOptions {
  /// Subtract the first accumulated row from every row before forming
  /// moments. Neutral for the covariance, and keeps the raw second moment
  /// from swamping it when activations carry a large mean.
  bool shift_by_first_row = false;
  /// Use the OpenMP kernel (otherwise the serial reference kernel).
  bool parallel = true;
};

struct CovarianceSummary;

/// Streaming raw moments: n, sum of rows, and sum of row outer products.
class MomentAccumulator {
public:
  explicit MomentAccumulator(std::size_t dim, AccumulatorOptions options = {}, CovarianceMeta meta = {});

  /// Adds n' x D rows. Throws argument error on a column mismatch and data
  /// error on non-finite entries (the accumulator is left unchanged).
  void add(RowMatrixRef rows);

  std::size_t count() const { return n_; }
  std::size_t dim() const { return static_cast<std::size_t>(sum_.size()); }
  const Eigen::VectorXd& sum() const { return sum_; }
  const Eigen::MatrixXd& sum_outer() const { return outer_.matrix(); }
  /// Empty until a shift has been fixed.
  const Eigen::VectorXd& shift() const { return shift_; }
  const CovarianceMeta& meta() const { return meta_; }
  const AccumulatorOptions& options() const { return options_; }

private:
  friend CovarianceSummary finalize(MomentAccumulator acc);

  std::size_t n_ = 0;
  Eigen::VectorXd sum_;
  CovarianceBuffer outer_;
  Eigen::VectorXd shift_;
  AccumulatorOptions options_;
  CovarianceMeta meta_;
};

/// Functional form: returns `acc` with `rows` added.
MomentAccumulator accumulate(MomentAccumulator acc, RowMatrixRef rows);

struct CovarianceSummary {
  Eigen::VectorXd mean;
  CovarianceBuffer cov_storage;
  std::size_t n = 0;
  CovarianceMeta meta;

  const Eigen::MatrixXd& cov() const { return cov_storage.matrix(); }
  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

/// Unbiased covariance (sum_outer - n mu mu^T) / (n - 1), symmetrized.
/// Consumes the accumulator and reuses its outer-product buffer, so no
/// second D x D matrix is allocated. Requires n >= 2.
CovarianceSummary finalize(MomentAccumulator acc);

/// Accumulates every row of `batch` (in chunks of `chunk_rows`) and finalizes.
CovarianceSummary covariance_of(const ActivationBatch& batch, AccumulatorOptions options = {},
                                std::size_t chunk_rows = 4096);

/// Pre and post populations must be the same tokens: equal N, B and S, and
/// identical source row sets when either side was sub-sampled. Throws a
/// pairing error naming the first differing field.
void paired_population_check(const ActivationBatch& pre, const ActivationBatch& post);

}  // namespace nerve
