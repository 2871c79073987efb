#include <benchmark/benchmark.h>

#include <cmath>

#include "floodplan/geometry.hpp"

using namespace floodplan;

static void BM_CellsInPolygon(benchmark::State& state) {
  const auto vertices = static_cast<int>(state.range(0));
  GridGeometry geo{0.0, 0.0, 2.0, 500, 500};
  Ring ring;
  for (int k = 0; k < vertices; ++k) {
    const double a = 2.0 * M_PI * k / vertices;
    const double r = 300.0 + 100.0 * std::sin(5.0 * a);
    ring.push_back({500.0 + r * std::cos(a), 500.0 + r * std::sin(a)});
  }
  const Polygon poly{{ring}};
  for (auto _ : state) benchmark::DoNotOptimize(cells_in_polygon(poly, geo));
}
BENCHMARK(BM_CellsInPolygon)->Arg(16)->Arg(256);
