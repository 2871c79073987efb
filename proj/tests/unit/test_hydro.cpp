#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "floodplan/error.hpp"
#include "floodplan/geodata.hpp"
#include "floodplan/hydro.hpp"
#include "floodplan/interventions.hpp"
#include "floodplan/storm.hpp"
#include "support.hpp"

using namespace floodplan;
using floodplan::testing::closed_settings;
using floodplan::testing::flat_grid;
using floodplan::testing::uniform_props;

namespace {

double ritter_depth(double x, double x0, double t, double hl, double g) {
  const double c0 = std::sqrt(g * hl);
  const double xi = (x - x0) / t;
  if (xi <= -c0) return hl;
  if (xi >= 2.0 * c0) return 0.0;
  const double a = 2.0 * c0 - xi;
  return a * a / (9.0 * g);
}

// Advances to `t_end` with CFL steps; returns the number of steps.
std::size_t run_until(hydro::Solver& solver, hydro::FlowState& s, double t_end) {
  std::size_t n = 0;
  while (s.t < t_end - 1e-12) {
    const double dt = std::min(solver.cfl_dt(s), t_end - s.t);
    solver.advance(s, {}, 0.0, dt);
    ++n;
  }
  return n;
}

double max_abs_q(const hydro::FlowState& s) {
  double m = 0.0;
  for (std::size_t i = 0; i < s.h.size(); ++i) m = std::max({m, std::abs(s.qx[i]), std::abs(s.qy[i])});
  return m;
}

}  // namespace

TEST_SUITE("hydro") {

TEST_CASE("CFL step for still water of 1 m on 2 m cells") {
  const auto grid = flat_grid(4, 4, 2.0);
  hydro::FlowState s;
  s.h.assign(16, 1.0);
  s.qx.assign(16, 0.0);
  s.qy.assign(16, 0.0);
  CHECK(hydro::cfl_dt(s, grid, 0.5) == doctest::Approx(1.0 / std::sqrt(9.81)).epsilon(1e-14));
  s.h.assign(16, 0.0);
  CHECK(hydro::cfl_dt(s, grid, 0.5) == hydro::SolverSettings{}.dt_max);
}

TEST_CASE("still water on flat ground stays still") {
  const auto grid = flat_grid(20, 20, 2.0);
  const auto props = uniform_props(400, 0.03);
  hydro::Solver solver(grid, props, closed_settings());
  auto s = hydro::dry_state(grid, props);
  s.h.assign(400, 0.3);
  run_until(solver, s, 60.0);
  CHECK(max_abs_q(s) == 0.0);
  for (double h : s.h) CHECK(h == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("lake at rest over random bathymetry, wet and partly dry") {
  for (double top : {0.8, 1.3}) {
    auto grid = flat_grid(40, 40, 2.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> z(0.0, top);
    for (auto& e : grid.elevation) e = z(rng);
    grid.active[grid.geo.index(10, 10)] = 0;  // an internal wall too
    const auto props = uniform_props(grid.geo.cell_count(), 0.03);
    hydro::Solver solver(grid, props, closed_settings());
    auto s = hydro::dry_state(grid, props);
    for (std::size_t i = 0; i < s.h.size(); ++i)
      s.h[i] = grid.active[i] ? std::max(0.0, 1.0 - grid.elevation[i]) : 0.0;
    for (int k = 0; k < 1000; ++k) solver.advance(s, {}, 0.0, solver.cfl_dt(s));
    CHECK(max_abs_q(s) <= 1e-8);
  }
}

TEST_CASE("dam break follows the Ritter solution") {
  const std::size_t n = 1000;
  const double dx = 1.0, hl = 1.0, x0 = 500.0, t = 10.0, g = 9.81;
  const auto grid = flat_grid(1, n, dx);
  const auto props = uniform_props(n, 0.0);
  hydro::Solver solver(grid, props, closed_settings());
  auto s = hydro::dry_state(grid, props);
  for (std::size_t c = 0; c < n; ++c) s.h[c] = grid.geo.center_x(c) < x0 ? hl : 0.0;
  run_until(solver, s, t);

  double err = 0.0, norm = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double exact = ritter_depth(grid.geo.center_x(c), x0, t, hl, g);
    err += std::abs(s.h[c] - exact);
    norm += exact;
  }
  CHECK(err / norm <= 0.05);
  const double at_dam = 0.5 * (s.h[499] + s.h[500]);
  CHECK(std::abs(at_dam - 4.0 / 9.0 * hl) <= 0.03 * 4.0 / 9.0 * hl);
  // Waves have not reached either end.
  CHECK(s.h.front() == hl);
  CHECK(s.h.back() == 0.0);
}

TEST_CASE("closed flat basin stores all rain") {
  auto grid = flat_grid(100, 100, 2.0, 12.0);
  const auto props = uniform_props(grid.geo.cell_count(), 0.0);
  hydro::StormScenario sc;
  sc.id = "basin";
  sc.storm = storm::make_uniform_hyetograph(50.0, 3600.0, 3600.0, 10.0);
  sc.rain_weight.assign(grid.geo.cell_count(), 1.0);
  auto settings = closed_settings();
  settings.drain_down = 0.0;
  const auto r = hydro::run_scenario(sc, grid, props, settings);
  CHECK(r.ledger.relative_error() <= 1e-6);
  CHECK(r.ledger.stored == doctest::Approx(r.ledger.rain_in).epsilon(1e-12));
  CHECK(r.ledger.boundary_outflow == 0.0);
  for (std::size_t i = 0; i < r.final_state.h.size(); ++i) {
    CHECK(std::abs(r.final_state.h[i] - 0.05) <= 1e-6);
    CHECK(std::abs(r.max_depth.depth[i] - 0.05) <= 1e-6);
  }
}

TEST_CASE("infiltration takes rain up to the storage capacity") {
  const auto grid = flat_grid(10, 10, 2.0);
  hydro::StormScenario sc;
  sc.storm = storm::make_uniform_hyetograph(10.0, 3600.0, 3600.0, 1.0);
  sc.rain_weight.assign(100, 1.0);
  auto settings = closed_settings();
  settings.drain_down = 600.0;
  const double area = 100 * 4.0;

  SUBCASE("unlimited storage") {
    const auto props = uniform_props(100, 0.03, storm::mm_per_hour_to_m_per_s(20.0), 1.0);
    const auto r = hydro::run_scenario(sc, grid, props, settings);
    CHECK(r.ledger.infiltrated == doctest::Approx(0.010 * area).epsilon(1e-12));
    CHECK(r.ledger.stored == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("storage of 4 mm") {
    const auto props = uniform_props(100, 0.03, storm::mm_per_hour_to_m_per_s(20.0), 0.004);
    const auto r = hydro::run_scenario(sc, grid, props, settings);
    CHECK(r.ledger.infiltrated == doctest::Approx(0.004 * area).epsilon(1e-12));
    CHECK(r.ledger.stored == doctest::Approx(0.006 * area).epsilon(1e-9));
    CHECK(r.ledger.relative_error() <= 1e-9);
    for (double left : r.final_state.infiltration_left) CHECK(left == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  }
}

TEST_CASE("rain on a V valley collects at the outlet") {
  const std::size_t rows = 60, cols = 41;
  auto grid = flat_grid(rows, cols, 2.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      grid.elevation[grid.geo.index(r, c)] =
          0.05 * std::abs(grid.geo.center_x(c) - grid.geo.center_x(20)) + 0.01 * grid.geo.center_y(r);
  const auto props = uniform_props(grid.geo.cell_count(), 0.03);
  hydro::StormScenario sc;
  sc.storm = storm::make_uniform_hyetograph(30.0, 600.0, 600.0, 10.0);
  sc.rain_weight.assign(grid.geo.cell_count(), 0.0);
  for (std::size_t r = 0; r < 20; ++r)
    for (std::size_t c = 0; c < cols; ++c) sc.rain_weight[grid.geo.index(r, c)] = 1.0;
  auto settings = closed_settings();
  settings.open.south = true;
  settings.drain_down = 600.0;
  const auto res = hydro::run_scenario(sc, grid, props, settings);

  const double outlet = res.max_depth.depth[grid.geo.index(rows - 1, 20)];
  double ridge = 0.0;
  for (std::size_t r = 0; r < rows; ++r)
    ridge = std::max({ridge, res.max_depth.depth[grid.geo.index(r, 0)],
                      res.max_depth.depth[grid.geo.index(r, cols - 1)]});
  CHECK(outlet > ridge);
  CHECK(res.ledger.boundary_outflow > 0.0);
  CHECK(res.ledger.relative_error() <= 1e-9);
}

TEST_CASE("results do not depend on the thread count") {
  auto grid = flat_grid(48, 37, 2.0);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> z(0.0, 0.3);
  for (std::size_t i = 0; i < grid.elevation.size(); ++i)
    grid.elevation[i] = z(rng) + 0.01 * grid.geo.center_y(grid.geo.row_of(i));
  grid.active[grid.geo.index(20, 20)] = 0;
  const auto props = uniform_props(grid.geo.cell_count(), 0.03, 1e-6, 0.002);
  hydro::StormScenario sc;
  sc.storm = storm::make_stepped_hyetograph({30.0, 90.0}, 300.0, 10.0);
  sc.rain_weight.assign(grid.geo.cell_count(), 1.0);
  auto base = hydro::SolverSettings{};
  base.drain_down = 300.0;
  base.threads = 1;
  const auto a = hydro::run_scenario(sc, grid, props, base);
  for (unsigned t : {2u, 3u, 7u}) {
    auto s = base;
    s.threads = t;
    const auto b = hydro::run_scenario(sc, grid, props, s);
    CHECK(a.max_depth.depth == b.max_depth.depth);
    CHECK(a.ledger.boundary_outflow == b.ledger.boundary_outflow);
    CHECK(a.ledger.stored == b.ledger.stored);
    CHECK(a.steps == b.steps);
  }
}

TEST_CASE("solver input checks") {
  const auto grid = flat_grid(3, 3, 1.0);
  auto props = uniform_props(9, 0.03);
  props.manning[4] = -1.0;
  CHECK_THROWS_AS(hydro::Solver(grid, props, {}), DomainError);
  auto s = hydro::SolverSettings{};
  s.cfl = 1.5;
  CHECK_THROWS_AS(hydro::Solver(grid, uniform_props(9), s), ConfigError);
  hydro::StormScenario sc;
  sc.storm = storm::make_uniform_hyetograph(10.0, 600.0, 600.0, 1.0);
  sc.rain_weight.assign(4, 1.0);
  CHECK_THROWS_AS(hydro::run_scenario(sc, grid, uniform_props(9), {}), DomainError);
}

TEST_CASE("pond carving depth is volume over area") {
  SUBCASE("510 m2 and 765 m3") {
    const auto grid = flat_grid(40, 40, 1.0, 10.0);
    geo::LandUseMap lu{std::vector<geo::LandClass>(1600, geo::LandClass::green)};
    const auto props = hydro::make_surface_properties(lu, {});
    InterventionSpec pond;
    pond.id = "p12";
    pond.type = InterventionType::detention_pond;
    pond.geometry = rectangle(5, 5, 35, 22);
    pond.pond_volume = 765.0;
    CHECK(pond.area() == 510.0);
    const auto m = hydro::apply_interventions(grid, props, lu, std::vector{pond}, {});
    std::size_t carved = 0;
    for (std::size_t i = 0; i < 1600; ++i)
      if (m.props.pond[i]) {
        ++carved;
        CHECK(grid.elevation[i] - m.grid.elevation[i] == doctest::Approx(1.5));
        CHECK(m.landuse.cells[i] == geo::LandClass::pond);
      } else {
        CHECK(m.grid.elevation[i] == grid.elevation[i]);
      }
    CHECK(carved == 510);
  }
  SUBCASE("8,000 m2 and 10,000 m3") {
    const auto grid = flat_grid(60, 60, 2.0, 10.0);
    geo::LandUseMap lu{std::vector<geo::LandClass>(3600, geo::LandClass::green)};
    const auto props = hydro::make_surface_properties(lu, {});
    InterventionSpec pond;
    pond.type = InterventionType::detention_pond;
    pond.geometry = rectangle(10, 10, 110, 90);
    pond.pond_volume = 10'000.0;
    const auto m = hydro::apply_interventions(grid, props, lu, std::vector{pond}, {});
    const auto i = grid.geo.index(30, 30);
    REQUIRE(m.props.pond[i] == 1);
    CHECK(grid.elevation[i] - m.grid.elevation[i] == doctest::Approx(1.25));
  }
}

TEST_CASE("pavement changes infiltration only where drawn; capture leaves the domain alone") {
  const auto grid = flat_grid(10, 10, 2.0);
  geo::LandUseMap lu{std::vector<geo::LandClass>(100, geo::LandClass::paved)};
  const hydro::SurfaceParams params;
  const auto props = hydro::make_surface_properties(lu, params);
  InterventionSpec pave;
  pave.type = InterventionType::permeable_pavement;
  pave.geometry = rectangle(0, 0, 4, 4);
  InterventionSpec cap;
  cap.type = InterventionType::rain_capture;
  cap.tile_id = 1;
  const auto m = hydro::apply_interventions(grid, props, lu, std::vector{pave, cap}, params);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < 100; ++i)
    if (m.props.infiltration_rate[i] != props.infiltration_rate[i]) {
      ++changed;
      CHECK(m.props.infiltration_rate[i] ==
            storm::mm_per_hour_to_m_per_s(params.pavement.infiltration_mm_per_h));
    }
  CHECK(changed == 4);
  CHECK(m.grid.elevation == grid.elevation);

  InterventionSpec outside = pave;
  outside.geometry = rectangle(100, 100, 110, 110);
  CHECK_THROWS_AS(hydro::apply_interventions(grid, props, lu, std::vector{outside}, params), GeometryError);
}

}  // TEST_SUITE
