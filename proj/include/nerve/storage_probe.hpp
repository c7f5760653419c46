#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace nerve {

// Process-wide count of live covariance-sized storage (accumulator outer
// products and finalized covariance matrices), in scalar values.
namespace storage_probe {
std::size_t live_values();
std::size_t peak_values();
void reset_peak();
}  // namespace storage_probe

/// A D x D matrix whose lifetime is reported to storage_probe.
class CovarianceBuffer {
public:
  CovarianceBuffer() = default;
  explicit CovarianceBuffer(Eigen::Index dim);
  CovarianceBuffer(const CovarianceBuffer& other);
  CovarianceBuffer(CovarianceBuffer&& other) noexcept;
  CovarianceBuffer& operator=(const CovarianceBuffer& other);
  CovarianceBuffer& operator=(CovarianceBuffer&& other) noexcept;
  ~CovarianceBuffer();

  Eigen::MatrixXd& matrix() { return matrix_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }

private:
  void release() noexcept;

  Eigen::MatrixXd matrix_;
  std::size_t registered_ = 0;
};

}  // namespace nerve
