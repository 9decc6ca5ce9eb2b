#include "reaper/models.hpp"
#include "reaper/recovery.hpp"
#include "reaper/rng.hpp"
#include "reaper/solver.hpp"

#include <benchmark/benchmark.h>

#include <algorithm>
#include <cstdint>

// Microbenchmarks for the solver hot path: the per-iteration pieces
// (water-filling, the weighted least-squares sweep, the spectral norm) and
// the end-to-end IRLS solve on a needle-sized dataset.

namespace {

using namespace reaper;

Vector random_spectrum(int n, std::uint64_t seed) {
  Rng rng(seed);
  Vector lambda(n);
  for (int i = 0; i < n; ++i) lambda(i) = rng.next_uniform();
  std::sort(lambda.begin(), lambda.end(), std::greater<double>());
  return lambda;
}

Matrix random_points(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) x(i, j) = rng.next_gaussian();
  }
  return x;
}

void BM_Waterfill(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const Vector lambda = random_spectrum(dim, 42);
  const double d = dim / 10.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(waterfill(lambda, d));
  }
}
BENCHMARK(BM_Waterfill)->Arg(20)->Arg(100)->Arg(500);

void BM_WeightedLeastSquares(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const Matrix x = random_points(dim, 4 * dim, 7);
  Rng rng(11);
  Vector w(x.cols());
  for (int i = 0; i < w.size(); ++i) w(i) = 0.1 + rng.next_uniform();
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_weighted_ls(x, w, dim / 10.0));
  }
}
BENCHMARK(BM_WeightedLeastSquares)->Arg(20)->Arg(100)->Unit(benchmark::kMicrosecond);

void BM_SpectralNorm(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const Matrix a = random_points(dim, 2 * dim, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral_norm(a));
  }
}
BENCHMARK(BM_SpectralNorm)->Arg(50)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_NeedleSolve(benchmark::State& state) {
  HaystackParams params;
  params.ambient_dim = 100;
  params.subspace_dim = 1;
  params.n_inliers = 13;
  params.n_outliers = 200;
  params.seed = 5;
  const HaystackSample sample = sample_haystack(params);
  Matrix points(params.ambient_dim, params.n_inliers + params.n_outliers);
  points << sample.dataset.inliers, sample.dataset.outliers;

  IrlsConfig cfg;
  cfg.d = 1.0;
  for (auto _ : state) {
    auto [p, trace] = s_reaper_solve(points, cfg);
    benchmark::DoNotOptimize(p);
    state.counters["iterations"] = trace.iterates_count;
  }
}
BENCHMARK(BM_NeedleSolve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
