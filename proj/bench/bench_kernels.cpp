// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS set to compare.
#include <benchmark/benchmark.h>

#include "goat/core.hpp"
#include "goat/kernels.hpp"

namespace {

using goat::Matrix;
using goat::Vector;

Matrix random_points(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  goat::Rng rng(seed);
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) m(i, k) = rng.normal();
  }
  return m;
}

template <bool Parallel>
void BM_pairwise_cost(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Matrix a = random_points(n, 8, 1);
  const Matrix b = random_points(n, 8, 2);
  Matrix out;
  for (auto _ : state) {
    if constexpr (Parallel) {
      goat::kernels::parallel::pairwise_cost(a, b, 2.0, out);
    } else {
      goat::kernels::serial::pairwise_cost(a, b, 2.0, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

template <bool Parallel>
void BM_softmin_update(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  Matrix cost;
  goat::kernels::serial::pairwise_cost(random_points(n, 2, 3), random_points(n, 2, 4), 2.0, cost);
  const Vector potential = Vector::Zero(n);
  const Vector log_marginal = Vector::Constant(n, -std::log(static_cast<double>(n)));
  Vector out;
  for (auto _ : state) {
    if constexpr (Parallel) {
      goat::kernels::parallel::softmin_update(cost, potential, log_marginal, 0.05, out);
    } else {
      goat::kernels::serial::softmin_update(cost, potential, log_marginal, 0.05, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

template <bool Parallel>
void BM_affine_softmax(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Matrix x = random_points(n, 32, 5);
  const Matrix w = random_points(32, 10, 6);
  const Vector b = Vector::Zero(10);
  Matrix out;
  for (auto _ : state) {
    if constexpr (Parallel) {
      goat::kernels::parallel::affine_rows(x, w, b, out);
      goat::kernels::parallel::softmax_rows(out);
    } else {
      goat::kernels::serial::affine_rows(x, w, b, out);
      goat::kernels::serial::softmax_rows(out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

}  // namespace

BENCHMARK(BM_pairwise_cost<false>)->Arg(256)->Arg(1024);
BENCHMARK(BM_pairwise_cost<true>)->Arg(256)->Arg(1024);
BENCHMARK(BM_softmin_update<false>)->Arg(256)->Arg(1024);
BENCHMARK(BM_softmin_update<true>)->Arg(256)->Arg(1024);
BENCHMARK(BM_affine_softmax<false>)->Arg(4096);
BENCHMARK(BM_affine_softmax<true>)->Arg(4096);

BENCHMARK_MAIN();
