#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "floodplan/damage.hpp"
#include "floodplan/error.hpp"
#include "support.hpp"

using namespace floodplan;
using exposure::ExposureClass;

namespace {

damage::DamageCurve curve(geo::UseClass c, std::vector<std::pair<double, double>> pts) {
  return {c, std::move(pts)};
}

damage::DamageCurves both() {
  damage::DamageCurves cs;
  cs.residential = curve(geo::UseClass::residential, {{0, 0}, {0.3, 20000}, {1.0, 50000}});
  cs.commercial = curve(geo::UseClass::commercial, {{0, 0}, {0.5, 100000}, {2.0, 400000}});
  return cs;
}

exposure::ExposureRecord record(geo::UseClass c, ExposureClass cls, double p90, double mean = 0.2) {
  exposure::ExposureRecord r;
  r.building_id = "x";
  r.use_class = c;
  r.exposure_class = cls;
  r.p90_depth = p90;
  r.mean_depth = mean;
  return r;
}

}  // namespace

TEST_SUITE("damage") {

TEST_CASE("piecewise-linear interpolation, clamped at the last point") {
  const auto c = curve(geo::UseClass::residential, {{0, 0}, {0.3, 20000}, {1.0, 50000}});
  CHECK(damage::interp_damage(c, 0.0) == 0.0);
  CHECK(damage::interp_damage(c, 0.15) == doctest::Approx(10000.0));
  CHECK(damage::interp_damage(c, 0.3) == 20000.0);
  CHECK(damage::interp_damage(c, 0.65) == doctest::Approx(35000.0));
  CHECK(damage::interp_damage(c, 5.0) == 50000.0);
  CHECK_THROWS_AS(damage::interp_damage(c, -0.1), DomainError);
}

TEST_CASE("curve validation") {
  CHECK_THROWS_AS(curve(geo::UseClass::residential, {}).validate(), ConfigError);
  CHECK_THROWS_AS(curve(geo::UseClass::residential, {{0.1, 0}, {1, 5}}).validate(), ConfigError);
  CHECK_THROWS_AS(curve(geo::UseClass::residential, {{0, 0}, {1, 5}, {1, 6}}).validate(), ConfigError);
  CHECK_THROWS_AS(curve(geo::UseClass::residential, {{0, 0}, {1, 5}, {2, 4}}).validate(), ConfigError);
  CHECK_NOTHROW(curve(geo::UseClass::residential, {{0, 0}, {1, 5}, {2, 5}}).validate());
  damage::DamageCurves only_res;
  only_res.residential = both().residential;
  CHECK_THROWS_AS(only_res.for_class(geo::UseClass::commercial), ConfigError);
}

TEST_CASE("interpolation is monotone for random monotone curves") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
    for (int k = 0; k < 6; ++k) pts.push_back({pts.back().first + 0.01 + u(rng), pts.back().second + 1e5 * u(rng)});
    const auto c = curve(geo::UseClass::commercial, pts);
    c.validate();
    double prev = -1.0;
    for (double d = 0.0; d < 8.0; d += 0.013) {
      const double v = damage::interp_damage(c, d);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("low exposure costs nothing at any depth") {
  const auto cs = both();
  CHECK(damage::building_damage(record(geo::UseClass::commercial, ExposureClass::low, 3.0), cs) == 0.0);
  CHECK(damage::building_damage(record(geo::UseClass::commercial, ExposureClass::medium, 0.25), cs) ==
        doctest::Approx(50000.0));
  CHECK(damage::building_damage(record(geo::UseClass::residential, ExposureClass::high, 0.3), cs) == 20000.0);
}

TEST_CASE("per square metre mode scales by footprint area") {
  auto cs = both();
  cs.mode = damage::CurveMode::per_square_metre;
  cs.residential = curve(geo::UseClass::residential, {{0, 0}, {1, 100}});
  CHECK(damage::building_damage(record(geo::UseClass::residential, ExposureClass::high, 0.5), cs, 120.0) ==
        doctest::Approx(6000.0));

  geo::BuildingFootprint b;
  b.id = "b";
  b.use_class = geo::UseClass::residential;
  b.footprint_cells = {0, 1, 2};
  b.buffer_cells = {3, 4, 5, 6};
  const std::vector<double> depth{0, 0, 0, 0.5, 0.5, 0.5, 0.5};
  const auto s = damage::assess(depth, std::vector{b}, cs, 4.0);
  // 3 cells x 4 m^2 x 50 GBP/m^2.
  CHECK(s.total == doctest::Approx(600.0));
}

TEST_CASE("aggregation sums by class, counts classes and ignores order") {
  std::vector<damage::BuildingDamage> d{
      {"a", geo::UseClass::commercial, ExposureClass::high, 1'000'000.0},
      {"b", geo::UseClass::residential, ExposureClass::medium, 500'000.0},
      {"c", geo::UseClass::residential, ExposureClass::low, 0.0}};
  const auto s = damage::aggregate(d);
  CHECK(s.commercial == 1'000'000.0);
  CHECK(s.residential == 500'000.0);
  CHECK(s.total == 1'500'000.0);
  CHECK(s.counts.high == 1);
  CHECK(s.counts.medium == 1);
  CHECK(s.counts.low == 1);
  std::reverse(d.begin(), d.end());
  CHECK(damage::aggregate(d).total == s.total);
  CHECK(damage::aggregate(std::vector<damage::BuildingDamage>{}).total == 0.0);
}

TEST_CASE("aggregation is linear in per-building damages") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1e6);
  std::vector<damage::BuildingDamage> a, b, sum;
  for (int i = 0; i < 50; ++i) {
    const auto cls = i % 3 ? geo::UseClass::residential : geo::UseClass::commercial;
    const double x = std::floor(u(rng)), y = std::floor(u(rng));
    a.push_back({"", cls, ExposureClass::high, x});
    b.push_back({"", cls, ExposureClass::high, y});
    sum.push_back({"", cls, ExposureClass::high, x + y});
  }
  CHECK(damage::aggregate(sum).total == damage::aggregate(a).total + damage::aggregate(b).total);
}

TEST_CASE("rounded commercial and residential totals add up") {
  std::vector<damage::BuildingDamage> d{{"commercial", geo::UseClass::commercial, ExposureClass::high, 40.8e6},
                                        {"residential", geo::UseClass::residential, ExposureClass::high, 6.1e6}};
  const auto s = damage::aggregate(d);
  CHECK(std::abs(s.total - 47.0e6) <= 0.1e6);
}

TEST_CASE("zero depth costs nothing") {
  geo::BuildingFootprint b;
  b.id = "b";
  b.use_class = geo::UseClass::commercial;
  b.buffer_cells = {0, 1};
  const auto s = damage::assess(std::vector<double>{0.0, 0.0}, std::vector{b}, both(), 4.0);
  CHECK(s.total == 0.0);
}

TEST_CASE("curve CSV loading") {
  const auto dir = floodplan::testing::scratch_dir("curves");
  std::ofstream(dir / "ok.csv") << "depth_m,damage_gbp\n0,0\n0.5,1000\n1.5,3000\n";
  std::ofstream(dir / "bad.csv") << "depth_m,damage_gbp\n0,0\nhalf,1000\n";
  const auto c = damage::load_curve_csv(dir / "ok.csv", geo::UseClass::commercial);
  CHECK(c.points.size() == 3);
  CHECK(damage::interp_damage(c, 1.0) == doctest::Approx(2000.0));
  CHECK_THROWS_AS(damage::load_curve_csv(dir / "bad.csv", geo::UseClass::commercial), ParseError);
  CHECK_THROWS_AS(damage::load_curve_csv(dir / "none.csv", geo::UseClass::commercial), ConfigError);
}

}  // TEST_SUITE
