#include "nerve/kernels.hpp"

#include <omp.h>

namespace nerve::kernels {

void accumulate_moments_serial(RowMatrixRef rows, const Eigen::VectorXd& shift, Eigen::VectorXd& sum,
                               Eigen::MatrixXd& outer) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  const bool shifted = shift.size() == d;
  std::vector<double> x(static_cast<std::size_t>(d));
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index i = 0; i < d; ++i) x[i] = shifted ? rows(r, i) - shift[i] : rows(r, i);
    for (Eigen::Index i = 0; i < d; ++i) {
      sum[i] += x[i];
      for (Eigen::Index j = 0; j <= i; ++j) outer(i, j) += x[i] * x[j];
    }
  }
}

void accumulate_moments_omp(RowMatrixRef rows, const Eigen::VectorXd& shift, Eigen::VectorXd& sum,
                            Eigen::MatrixXd& outer) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  if (n == 0) return;
  const bool shifted = shift.size() == d;

  // Feature-major copy so every (i, j) reduction walks two contiguous rows.
  RowMatrix features(d, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < d; ++i) {
    const double s = shifted ? shift[i] : 0.0;
    for (Eigen::Index r = 0; r < n; ++r) features(i, r) = rows(r, i) - s;
  }

#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto fi = features.row(i);
    sum[i] += fi.sum();
    for (Eigen::Index j = 0; j <= i; ++j) outer(i, j) += fi.dot(features.row(j));
  }
}

void mirror_lower(Eigen::MatrixXd& m) {
  const Eigen::Index d = m.rows();
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = j + 1; i < d; ++i) m(j, i) = m(i, j);
  }
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace nerve::kernels
