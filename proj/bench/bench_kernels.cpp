// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include "elastic/exact.hpp"
#include "elastic/weighting.hpp"

using namespace elastic;

namespace {

SubsetTable table_for(std::int64_t L, int n) {
  auto f = build_weighting(WeightingFamily::pair_exponential(2.0), Lattice(1, L), n);
  return SubsetTable::build(L, n, [&](std::span<const Vertex> s) { return f.log_value(s); });
}

void BM_tilings_serial(benchmark::State& state) {
  const auto table = table_for(state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_tilings_serial(table));
}

void BM_tilings_parallel(benchmark::State& state) {
  const auto table = table_for(state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_tilings_parallel(table));
}

void BM_smoothness_serial(benchmark::State& state) {
  auto f = build_weighting(WeightingFamily::pair_exponential(2.0), Lattice(2, state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(smoothness_serial(f));
}

void BM_smoothness_parallel(benchmark::State& state) {
  auto f = build_weighting(WeightingFamily::pair_exponential(2.0), Lattice(2, state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(smoothness(f));
}

void BM_coarse_serial(benchmark::State& state) {
  const Lattice lat(2, state.range(0));
  auto f = build_weighting(WeightingFamily::pair_exponential(2.0), lat, 2);
  const Dissection dis(lat, 2);
  for (auto _ : state) benchmark::DoNotOptimize(coarse_average_serial(f, dis).log_table().size());
}

void BM_coarse_parallel(benchmark::State& state) {
  const Lattice lat(2, state.range(0));
  auto f = build_weighting(WeightingFamily::pair_exponential(2.0), lat, 2);
  const Dissection dis(lat, 2);
  for (auto _ : state) benchmark::DoNotOptimize(coarse_average(f, dis).log_table().size());
}

}  // namespace

BENCHMARK(BM_tilings_serial)->Arg(12)->Arg(14)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_tilings_parallel)->Arg(12)->Arg(14)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_smoothness_serial)->Arg(6)->Arg(9)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_smoothness_parallel)->Arg(6)->Arg(9)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_coarse_serial)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_coarse_parallel)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
