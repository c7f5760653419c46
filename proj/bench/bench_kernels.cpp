#include <random>

#include <benchmark/benchmark.h>

#include "nerve/covariance.hpp"
#include "nerve/eigensolve.hpp"
#include "nerve/kernels.hpp"

namespace {

nerve::RowMatrix make_rows(Eigen::Index n, Eigen::Index d) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  nerve::RowMatrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = nd(gen);
  return m;
}

template <bool Parallel>
void BM_accumulate(benchmark::State& state) {
  const Eigen::Index d = state.range(0);
  const Eigen::Index n = 4096;
  const auto rows = make_rows(n, d);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(d, d);
  for (auto _ : state) {
    if constexpr (Parallel)
      nerve::kernels::accumulate_moments_omp(rows, Eigen::VectorXd(), sum, outer);
    else
      nerve::kernels::accumulate_moments_serial(rows, Eigen::VectorXd(), sum, outer);
    benchmark::DoNotOptimize(outer.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
  state.counters["threads"] = nerve::kernels::max_threads();
}

Eigen::MatrixXd make_cov(Eigen::Index d) {
  const auto rows = make_rows(4 * d, d);
  return (rows.transpose() * rows) / static_cast<double>(4 * d - 1);
}

void BM_eig_full(benchmark::State& state) {
  const auto cov = make_cov(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(nerve::eig_full(cov).total);
}

void BM_eig_randsvd(benchmark::State& state) {
  const auto cov = make_cov(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(nerve::eig_randsvd(cov, {.k = k, .seed = 1}).total);
}

void BM_eig_lanczos(benchmark::State& state) {
  const auto cov = make_cov(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(nerve::eig_lanczos(cov, {.k = k, .seed = 1}).total);
}

}  // namespace

BENCHMARK(BM_accumulate<false>)->Name("accumulate/serial")->Arg(64)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_accumulate<true>)->Name("accumulate/omp")->Arg(64)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_eig_full)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_eig_randsvd)->Args({256, 32})->Args({512, 64})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_eig_lanczos)->Args({256, 32})->Args({512, 64})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
