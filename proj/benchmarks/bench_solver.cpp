#include <benchmark/benchmark.h>

#include <random>

#include "floodplan/hydro.hpp"

using namespace floodplan;

namespace {

struct Domain {
  TerrainGrid grid;
  hydro::SurfaceProperties props;
};

Domain rough_slope(std::size_t n) {
  Domain d;
  d.grid.geo = {0.0, 0.0, 2.0, n, n};
  d.grid.elevation.resize(n * n);
  d.grid.active.assign(n * n, 1);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> noise(0.0, 0.05);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) d.grid.elevation[r * n + c] = 0.01 * double(n - r) + noise(rng);
  d.props.manning.assign(n * n, 0.03);
  d.props.infiltration_rate.assign(n * n, 0.0);
  d.props.infiltration_capacity.assign(n * n, 0.0);
  d.props.pond.assign(n * n, 0);
  return d;
}

}  // namespace

static void BM_SolverStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = rough_slope(n);
  hydro::SolverSettings settings;
  settings.threads = static_cast<unsigned>(state.range(1));
  hydro::Solver solver(d.grid, d.props, settings);
  auto s = hydro::dry_state(d.grid, d.props);
  for (auto& h : s.h) h = 0.05;
  const std::vector<double> weight(n * n, 1.0);
  for (auto _ : state) {
    const auto v = solver.advance(s, weight, 1e-5, std::min(solver.cfl_dt(s), 1.0));
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n));
}
BENCHMARK(BM_SolverStep)->Args({100, 1})->Args({400, 1})->Args({400, 2});

BENCHMARK_MAIN();
