#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "valueprobe/statistics.hpp"

namespace {

std::vector<double> sample(std::size_t n, std::uint32_t seed, int alphabet = 0) {
  std::mt19937 rng(seed);
  std::vector<double> out(n);
  if (alphabet > 0) {
    std::uniform_int_distribution<int> d(1, alphabet);
    for (auto& v : out) v = d(rng);
  } else {
    std::normal_distribution<double> d;
    for (auto& v : out) v = d(rng);
  }
  return out;
}

void BM_Spearman(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = sample(n, 1), y = sample(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(valueprobe::spearman(x, y));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Spearman)->RangeMultiplier(4)->Range(8, 4096)->Complexity();

void BM_SpearmanTied(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = sample(n, 3, 4), y = sample(n, 4, 4);
  for (auto _ : state) benchmark::DoNotOptimize(valueprobe::spearman(x, y));
}
BENCHMARK(BM_SpearmanTied)->Arg(24)->Arg(226);

void BM_MannWhitneyExact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = sample(n, 5, 5), b = sample(n, 6, 5);
  for (auto _ : state) benchmark::DoNotOptimize(valueprobe::mann_whitney_u(a, b));
}
BENCHMARK(BM_MannWhitneyExact)->DenseRange(4, 20, 4);

void BM_MannWhitneyNormal(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = sample(n, 7), b = sample(n, 8);
  for (auto _ : state) benchmark::DoNotOptimize(valueprobe::mann_whitney_u(a, b));
}
BENCHMARK(BM_MannWhitneyNormal)->Arg(226)->Arg(1024);

}  // namespace
