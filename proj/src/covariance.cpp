#include "nerve/covariance.hpp"

#include <algorithm>
#include <string>

#include "nerve/errors.hpp"
#include "nerve/kernels.hpp"

namespace nerve {

MomentAccumulator::MomentAccumulator(std::size_t dim, AccumulatorOptions options, CovarianceMeta meta)
    : sum_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))),
      outer_(static_cast<Eigen::Index>(dim)),
      options_(options),
      meta_(meta) {
  if (dim == 0) fail(ErrorKind::argument, "accumulator dimension must be >= 1");
}

void MomentAccumulator::add(RowMatrixRef rows) {
  if (static_cast<std::size_t>(rows.cols()) != dim()) {
    fail(ErrorKind::argument, "chunk has " + std::to_string(rows.cols()) + " columns, accumulator expects " +
                                  std::to_string(dim()));
  }
  if (rows.rows() == 0) return;
  if (const auto bad = first_non_finite(rows); bad[0] >= 0) {
    fail(ErrorKind::data, "non-finite value at (row " + std::to_string(bad[0]) + ", col " + std::to_string(bad[1]) + ")");
  }
  if (options_.shift_by_first_row && shift_.size() == 0) shift_ = rows.row(0).transpose();

  auto& outer = outer_.matrix();
  if (options_.parallel) {
    kernels::accumulate_moments_omp(rows, shift_, sum_, outer);
  } else {
    kernels::accumulate_moments_serial(rows, shift_, sum_, outer);
  }
  kernels::mirror_lower(outer);
  n_ += static_cast<std::size_t>(rows.rows());
}

MomentAccumulator accumulate(MomentAccumulator acc, RowMatrixRef rows) {
  acc.add(rows);
  return acc;
}

CovarianceSummary finalize(MomentAccumulator acc) {
  if (acc.n_ < 2) {
    fail(ErrorKind::insufficient_samples, "covariance needs at least 2 samples, have " + std::to_string(acc.n_));
  }
  const double n = static_cast<double>(acc.n_);
  const Eigen::VectorXd shifted_mean = acc.sum_ / n;

  CovarianceSummary out;
  out.n = acc.n_;
  out.meta = acc.meta_;
  out.mean = acc.shift_.size() == shifted_mean.size() ? Eigen::VectorXd(acc.shift_ + shifted_mean) : shifted_mean;
  out.cov_storage = std::move(acc.outer_);

  Eigen::MatrixXd& cov = out.cov_storage.matrix();
  const Eigen::Index d = cov.rows();
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) cov(i, j) = (cov(i, j) - n * shifted_mean[i] * shifted_mean[j]) / (n - 1.0);
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = j + 1; i < d; ++i) {
      const double avg = 0.5 * (cov(i, j) + cov(j, i));
      cov(i, j) = avg;
      cov(j, i) = avg;
    }
  }
  return out;
}

CovarianceSummary covariance_of(const ActivationBatch& batch, AccumulatorOptions options, std::size_t chunk_rows) {
  chunk_rows = std::max<std::size_t>(chunk_rows, 1);
  CovarianceMeta meta{batch.header.layer, batch.header.step, batch.header.tag};
  MomentAccumulator acc(batch.dim(), options, meta);
  const auto n = static_cast<Eigen::Index>(batch.rows());
  for (Eigen::Index start = 0; start < n; start += static_cast<Eigen::Index>(chunk_rows)) {
    const Eigen::Index len = std::min<Eigen::Index>(static_cast<Eigen::Index>(chunk_rows), n - start);
    acc.add(batch.data.middleRows(start, len));
  }
  return finalize(std::move(acc));
}

void paired_population_check(const ActivationBatch& pre, const ActivationBatch& post) {
  auto mismatch = [](const std::string& field, auto a, auto b) {
    fail(ErrorKind::pairing, "pre/post populations differ in " + field + ": " + std::to_string(a) + " vs " +
                                 std::to_string(b));
  };
  if (pre.rows() != post.rows()) mismatch("N", pre.rows(), post.rows());
  if (pre.header.batch != post.header.batch) mismatch("B", pre.header.batch, post.header.batch);
  if (pre.header.seq_len != post.header.seq_len) mismatch("S", pre.header.seq_len, post.header.seq_len);
  if (pre.source_rows != post.source_rows) {
    const auto it = std::mismatch(pre.source_rows.begin(), pre.source_rows.end(), post.source_rows.begin());
    const auto at = static_cast<std::size_t>(it.first - pre.source_rows.begin());
    fail(ErrorKind::pairing, "pre/post populations differ in row indices at sampled row " + std::to_string(at) +
                                 ": " + std::to_string(*it.first) + " vs " + std::to_string(*it.second));
  }
}

}  // namespace nerve
