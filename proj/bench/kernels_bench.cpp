// Serial reference vs OpenMP kernels: value-map evaluation and frontier mask.

#include <random>

#include <benchmark/benchmark.h>

#include "topv/ptd.hpp"
#include "topv/topmap.hpp"

using namespace topv;

namespace {

ValueMap make_map(int side, int n_terms, std::vector<GaussianTerm>& terms) {
  ValueMap vm;
  vm.width = vm.height = side;
  vm.values.assign(static_cast<std::size_t>(side) * side, 0.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(0.0, side * vm.meters_per_cell), peak(0.1, 1.0), sig(0.5, 4.0);
  terms.clear();
  for (int i = 0; i < n_terms; ++i) terms.push_back({{pos(rng), pos(rng)}, peak(rng), sig(rng)});
  return vm;
}

OccupancyGrid make_grid(int side) {
  OccupancyGrid g({side, side, 0.05}, {0.0, 0.0});
  std::mt19937_64 rng(11);
  std::bernoulli_distribution wall(0.05);
  // Known disc in the middle, with scattered obstacles.
  const double r = side * 0.35;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const double dx = x - side / 2.0, dy = y - side / 2.0;
      if (dx * dx + dy * dy < r * r) g.set({x, y}, wall(rng) ? CellState::Obstacle : CellState::Free);
    }
  }
  return g;
}

void BM_ValueMapSerial(benchmark::State& state) {
  std::vector<GaussianTerm> terms;
  auto vm = make_map(static_cast<int>(state.range(0)), 12, terms);
  for (auto _ : state) {
    kernels::evaluate_terms_serial(terms, vm);
    benchmark::DoNotOptimize(vm.values.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_ValueMapParallel(benchmark::State& state) {
  std::vector<GaussianTerm> terms;
  auto vm = make_map(static_cast<int>(state.range(0)), 12, terms);
  for (auto _ : state) {
    kernels::evaluate_terms_parallel(terms, vm);
    benchmark::DoNotOptimize(vm.values.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_FrontierMaskSerial(benchmark::State& state) {
  const auto g = make_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::frontier_mask_serial(g));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_FrontierMaskParallel(benchmark::State& state) {
  const auto g = make_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::frontier_mask_parallel(g));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

}  // namespace

BENCHMARK(BM_ValueMapSerial)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ValueMapParallel)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FrontierMaskSerial)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FrontierMaskParallel)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
