#include <benchmark/benchmark.h>

#include <random>

#include "floodplan/exposure.hpp"

using namespace floodplan;

static void BM_ClassifyAll(benchmark::State& state) {
  const auto buildings = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::exponential_distribution<double> depth(5.0);
  std::vector<double> grid(buildings * 40);
  for (auto& v : grid) v = depth(rng);
  std::vector<geo::BuildingFootprint> bs(buildings);
  for (std::size_t b = 0; b < buildings; ++b) {
    bs[b].id = "b" + std::to_string(b);
    for (std::size_t k = 0; k < 40; ++k) bs[b].buffer_cells.push_back(b * 40 + k);
  }
  for (auto _ : state) benchmark::DoNotOptimize(exposure::classify_all(grid, bs));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * buildings));
}
BENCHMARK(BM_ClassifyAll)->Arg(1000)->Arg(20000);
