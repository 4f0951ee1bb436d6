#include <benchmark/benchmark.h>

#include <random>

#include "nptails/evolution.hpp"
#include "nptails/time_integral.hpp"

using namespace nptails;

namespace {

std::shared_ptr<const CoordinateMap> schwarzschild() {
  static auto map = make_map(make_model(ModelKind::Schwarzschild, 1.0));
  return map;
}

// Diamond kernel throughput; the counter is grid cells per second.
void BM_Evolve(benchmark::State& state) {
  const double h = 1.0 / double(state.range(0));
  auto d = bump_data(schwarzschild(), 40.0, 10.0, 1.0, 0, 600.0);
  EvolveOptions opt;
  opt.rows_per_block = static_cast<int>(state.range(1));
  const NullGrid grid = make_grid(h, 300.0, d.v0, 600.0);
  for (auto _ : state) benchmark::DoNotOptimize(evolve(d, grid, {}, opt).final_row.back());
  state.counters["cells/s"] =
      benchmark::Counter(double(grid.cells()) * double(state.iterations()), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Evolve)->ArgsProduct({{8, 16}, {1, 2, 4}})->Unit(benchmark::kMillisecond);

void BM_EvolveWithObservers(benchmark::State& state) {
  auto d = bump_data(schwarzschild(), 40.0, 10.0, 1.0, 0, 600.0);
  std::vector<ObserverSpec> obs{constant_r(10.0), scri_proxy(), constant_rstar(-50.0)};
  const NullGrid grid = make_grid(1.0 / 16.0, 300.0, d.v0, 600.0);
  for (auto _ : state) benchmark::DoNotOptimize(evolve(d, grid, obs).observers.size());
}
BENCHMARK(BM_EvolveWithObservers)->Unit(benchmark::kMillisecond);

void BM_CoordinateMap(benchmark::State& state) {
  const auto m = make_model(ModelKind::ReissnerNordstrom, 1.0, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(CoordinateMap(m).table_size());
}
BENCHMARK(BM_CoordinateMap)->Unit(benchmark::kMillisecond);

void BM_InverseTortoise(benchmark::State& state) {
  auto map = schwarzschild();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> rs(-200.0, 5000.0);
  std::vector<double> x(4096);
  for (double& v : x) v = rs(rng);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(map->inverse_tortoise(x[i++ & 4095]));
}
BENCHMARK(BM_InverseTortoise);

void BM_TimeInvertedChain(benchmark::State& state) {
  auto d = bump_data(schwarzschild(), 40.0, 10.0, 1.0, 0, 3000.0);
  for (auto _ : state) benchmark::DoNotOptimize(time_inverted_I0_kth(d, 1).inverted.front().value);
}
BENCHMARK(BM_TimeInvertedChain)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
