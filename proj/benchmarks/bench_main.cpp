#include <benchmark/benchmark.h>

#include <random>

#include "mre/linalg.hpp"
#include "mre/measured_states.hpp"
#include "mre/oracle.hpp"

using namespace mre;

namespace {

struct Pair {
  CMat rho, sigma;
};

Pair sample(int dim, uint64_t seed) {
  std::mt19937_64 rng(seed);
  return {random_density(dim, rng), random_density(dim, rng)};
}

void BM_Eigh(benchmark::State& state) {
  std::mt19937_64 rng(1);
  CMat a = random_pd(static_cast<int>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(eigh(a));
}
BENCHMARK(BM_Eigh)->Arg(4)->Arg(16)->Arg(64);

void BM_GeometricMean(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const int d = static_cast<int>(state.range(0));
  CMat x = random_pd(d, rng), y = random_pd(d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(geometric_mean(x, y, 0.375));
}
BENCHMARK(BM_GeometricMean)->Arg(4)->Arg(16);

void BM_StatesRenyiHalf(benchmark::State& state) {
  Pair p = sample(static_cast<int>(state.range(0)), 3);
  RenyiOrder order = RenyiOrder::parse("1/2");
  for (auto _ : state) benchmark::DoNotOptimize(measured_renyi_quasi(p.rho, p.sigma, order));
}
BENCHMARK(BM_StatesRenyiHalf)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_StatesRenyiDyadicChain(benchmark::State& state) {
  // alpha = 1/4 runs the full 30-level bisection chain.
  Pair p = sample(2, 4);
  RenyiOrder order = RenyiOrder::parse("1/4");
  for (auto _ : state) benchmark::DoNotOptimize(measured_renyi_quasi(p.rho, p.sigma, order));
}
BENCHMARK(BM_StatesRenyiDyadicChain)->Unit(benchmark::kMillisecond);

void BM_StatesRelent(benchmark::State& state) {
  Pair p = sample(2, 5);
  StateOptions opts;
  opts.mk = std::make_pair(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(measured_relative_entropy(p.rho, p.sigma, opts));
}
BENCHMARK(BM_StatesRelent)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_BruteForce(benchmark::State& state) {
  Pair p = sample(2, 6);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        brute_force_measured(p.rho, p.sigma, {}, static_cast<int>(state.range(0)), 7));
}
BENCHMARK(BM_BruteForce)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
