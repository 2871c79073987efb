#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "floodplan/error.hpp"
#include "floodplan/exposure.hpp"

using namespace floodplan;
using exposure::ExposureClass;

namespace {

// The decision table written out row by row; nullopt where no row applies.
std::optional<ExposureClass> table_row(double mean, double p90) {
  if (mean < 0.10 && p90 < 0.30) return ExposureClass::low;
  if (mean < 0.10 && p90 >= 0.30) return ExposureClass::medium;
  if (mean >= 0.10 && mean < 0.30 && p90 < 0.30) return ExposureClass::medium;
  if (mean >= 0.10 && p90 >= 0.30) return ExposureClass::high;
  return std::nullopt;
}

exposure::BufferStats oracle(std::vector<double> d) {
  exposure::BufferStats s;
  if (d.empty()) {
    s.empty_buffer = true;
    return s;
  }
  double sum = 0.0;
  for (double v : d) sum += v;
  s.mean = sum / double(d.size());
  std::sort(d.begin(), d.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.9 * double(d.size()) - 1e-12));
  s.p90 = d[rank - 1];
  return s;
}

}  // namespace

TEST_SUITE("exposure") {

TEST_CASE("table rows") {
  CHECK(exposure::classify(0.05, 0.20) == ExposureClass::low);
  CHECK(exposure::classify(0.05, 0.35) == ExposureClass::medium);
  CHECK(exposure::classify(0.15, 0.25) == ExposureClass::medium);
  CHECK(exposure::classify(0.12, 0.35) == ExposureClass::high);
}

TEST_CASE("inclusive boundaries at 0.10 and 0.30") {
  const double below_mean = std::nextafter(0.10, 0.0), below_p90 = std::nextafter(0.30, 0.0);
  CHECK(exposure::classify(below_mean, below_p90) == ExposureClass::low);
  CHECK(exposure::classify(0.10, below_p90) == ExposureClass::medium);
  CHECK(exposure::classify(below_mean, 0.30) == ExposureClass::medium);
  CHECK(exposure::classify(0.10, 0.30) == ExposureClass::high);
  CHECK(exposure::classify(below_p90, below_p90) == ExposureClass::medium);
}

TEST_CASE("every listed combination on a boundary grid matches the table") {
  const std::vector<double> means{0.0, 0.05, std::nextafter(0.10, 0.0), 0.10, 0.2,
                                  std::nextafter(0.30, 0.0), 0.30, 0.75};
  const std::vector<double> p90s{0.0, 0.1, std::nextafter(0.30, 0.0), 0.30, 0.31, 2.0};
  for (double m : means)
    for (double p : p90s) {
      const auto row = table_row(m, p);
      if (row) {
        CHECK(exposure::classify(m, p) == *row);
        CHECK_FALSE(exposure::is_unlisted(m, p));
      } else {
        CHECK(exposure::is_unlisted(m, p));
        CHECK(exposure::classify(m, p) == ExposureClass::high);
      }
    }
}

TEST_CASE("invalid statistics are rejected") {
  CHECK_THROWS_AS(exposure::classify(-0.01, 0.2), DomainError);
  CHECK_THROWS_AS(exposure::classify(0.1, std::nan("")), DomainError);
  CHECK_THROWS_AS(exposure::classify(INFINITY, 0.2), DomainError);
}

TEST_CASE("buffer stats: worked example, empty and single") {
  const std::vector<double> d{0.7, 0.1, 0.9, 0.3, 0.2, 1.0, 0.5, 0.4, 0.6, 0.8};
  const auto s = exposure::buffer_stats(d);
  CHECK(s.mean == doctest::Approx(0.55));
  CHECK(s.p90 == 0.9);
  const auto zero = exposure::buffer_stats(std::vector<double>(8, 0.0));
  CHECK(zero.mean == 0.0);
  CHECK(zero.p90 == 0.0);
  const auto one = exposure::buffer_stats(std::vector<double>{0.42});
  CHECK(one.mean == 0.42);
  CHECK(one.p90 == 0.42);
  const auto none = exposure::buffer_stats(std::vector<double>{});
  CHECK(none.empty_buffer);
  CHECK(none.mean == 0.0);
}

TEST_CASE("buffer stats equal a brute-force oracle on 1,000 random buffers") {
  std::mt19937_64 rng(2024);
  std::exponential_distribution<double> depth(6.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + rng() % 60;
    std::vector<double> d(k);
    for (auto& v : d) v = (rng() % 4 == 0) ? 0.0 : depth(rng);
    const auto got = exposure::buffer_stats(d);
    const auto want = oracle(d);
    CHECK(got.mean == want.mean);
    CHECK(got.p90 == want.p90);
    CHECK(exposure::classify(got.mean, got.p90) ==
          table_row(want.mean, want.p90).value_or(ExposureClass::high));
  }
}

TEST_CASE("classify_all flags empty buffers as low") {
  geo::BuildingFootprint wet, dry, none;
  wet.id = "wet";
  wet.buffer_cells = {0, 1, 2};
  dry.id = "dry";
  dry.buffer_cells = {3};
  none.id = "none";
  const std::vector<double> depth{0.5, 0.4, 0.3, 0.0};
  const auto recs = exposure::classify_all(depth, std::vector{wet, dry, none});
  CHECK(recs[0].exposure_class == ExposureClass::high);
  CHECK(recs[1].exposure_class == ExposureClass::low);
  CHECK(recs[2].exposure_class == ExposureClass::low);
  CHECK(recs[2].empty_buffer);
  const auto counts = exposure::count_classes(recs);
  CHECK(counts.high == 1);
  CHECK(counts.low == 2);
  CHECK(counts.inundated() == 1);
}

}  // TEST_SUITE
