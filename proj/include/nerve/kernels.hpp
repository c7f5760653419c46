#pragma once

// Moment-update kernels behind MomentAccumulator. The OpenMP kernel is the
// production path; the serial kernel is a straightforward reference kept
// for tests and for the benchmark baseline.

#include <Eigen/Core>

#include "nerve/ingest.hpp"

namespace nerve::kernels {

/// sum += sum_r (x_r - shift); outer += sum_r (x_r - shift)(x_r - shift)^T.
/// `shift` may be empty (no shift). Only the lower triangle of `outer` is
/// written; callers mirror it.
void accumulate_moments_serial(RowMatrixRef rows, const Eigen::VectorXd& shift, Eigen::VectorXd& sum,
                               Eigen::MatrixXd& outer);

/// Same contract as the serial kernel. Each lower-triangle entry is reduced
/// by exactly one thread in a fixed order, so results do not depend on the
/// thread count.
void accumulate_moments_omp(RowMatrixRef rows, const Eigen::VectorXd& shift, Eigen::VectorXd& sum,
                            Eigen::MatrixXd& outer);

/// Copies the lower triangle onto the upper triangle.
void mirror_lower(Eigen::MatrixXd& m);

int max_threads();

}  // namespace nerve::kernels
