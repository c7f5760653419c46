#include "nerve/storage_probe.hpp"

#include <atomic>

namespace nerve {
namespace {

std::atomic<std::size_t> g_live{0};
std::atomic<std::size_t> g_peak{0};

void add_live(std::size_t values) {
  const std::size_t now = g_live.fetch_add(values) + values;
  std::size_t peak = g_peak.load();
  while (now > peak && !g_peak.compare_exchange_weak(peak, now)) {
  }
}

}  // namespace

namespace storage_probe {
std::size_t live_values() { return g_live.load(); }
std::size_t peak_values() { return g_peak.load(); }
void reset_peak() { g_peak.store(g_live.load()); }
}  // namespace storage_probe

CovarianceBuffer::CovarianceBuffer(Eigen::Index dim) : matrix_(Eigen::MatrixXd::Zero(dim, dim)) {
  registered_ = static_cast<std::size_t>(matrix_.size());
  add_live(registered_);
}

CovarianceBuffer::CovarianceBuffer(const CovarianceBuffer& other) : matrix_(other.matrix_) {
  registered_ = static_cast<std::size_t>(matrix_.size());
  add_live(registered_);
}

CovarianceBuffer::CovarianceBuffer(CovarianceBuffer&& other) noexcept
    : matrix_(std::move(other.matrix_)), registered_(other.registered_) {
  other.registered_ = 0;
  other.matrix_.resize(0, 0);
}

CovarianceBuffer& CovarianceBuffer::operator=(const CovarianceBuffer& other) {
  if (this != &other) {
    CovarianceBuffer copy(other);
    *this = std::move(copy);
  }
  return *this;
}

CovarianceBuffer& CovarianceBuffer::operator=(CovarianceBuffer&& other) noexcept {
  if (this != &other) {
    release();
    matrix_ = std::move(other.matrix_);
    registered_ = other.registered_;
    other.registered_ = 0;
    other.matrix_.resize(0, 0);
  }
  return *this;
}

CovarianceBuffer::~CovarianceBuffer() { release(); }

void CovarianceBuffer::release() noexcept {
  g_live.fetch_sub(registered_);
  registered_ = 0;
  matrix_.resize(0, 0);
}

}  // namespace nerve
