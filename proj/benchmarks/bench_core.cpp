#include <benchmark/benchmark.h>

#include <vector>

#include "stabletail/estimators.hpp"
#include "stabletail/moments.hpp"
#include "stabletail/stability.hpp"
#include "stabletail/subgamma.hpp"

using namespace stabletail;

namespace {

Dataset ridge_sample(int n, int d, std::uint64_t seed) {
  const RidgeBallDistribution dist(static_cast<std::size_t>(d), 1.0);
  Rng rng = SeedStream(seed).rng();
  return sample_dataset(dist, static_cast<std::size_t>(n), rng);
}

}  // namespace

static void BM_EmpiricalQNorm(benchmark::State& state) {
  Rng rng(1);
  std::vector<double> xs(static_cast<std::size_t>(state.range(0)));
  for (auto& x : xs) x = rng.next_normal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(empirical_q_norm(xs, 16.0));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EmpiricalQNorm)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

static void BM_RidgeFit(benchmark::State& state) {
  const Dataset data = ridge_sample(static_cast<int>(state.range(0)), 4, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ridge_fit(data, 1.0));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RidgeFit)->RangeMultiplier(2)->Range(8, 64)->Complexity();

// n fits per evaluation: the linear-in-fits cost model of the leave-one-out path
static void BM_DeletedEstimate(benchmark::State& state) {
  const RidgeRule rule(1.0);
  const Dataset data = ridge_sample(static_cast<int>(state.range(0)), 2, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(deleted(rule, data));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DeletedEstimate)->RangeMultiplier(2)->Range(8, 64)->Complexity();

// O(n^2) fits per evaluation: why harness configs keep n <= 64 here
static void BM_RemovalProxyForDeleted(benchmark::State& state) {
  const RidgeRule rule(1.0);
  const Dataset data = ridge_sample(static_cast<int>(state.range(0)), 2, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vdel_for_deleted(rule, data));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RemovalProxyForDeleted)->RangeMultiplier(2)->Range(8, 32)->Complexity();

static void BM_StabilitySweepReplication(benchmark::State& state) {
  const RidgeRule rule(1.0);
  const RidgeBallDistribution dist(2, 1.0);
  const int n = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stability_sweep(rule, dist, n, 16, SeedStream(seed++)));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_StabilitySweepReplication)->RangeMultiplier(2)->Range(8, 64)->Complexity();

BENCHMARK_MAIN();
