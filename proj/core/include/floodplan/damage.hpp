#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "floodplan/exposure.hpp"
#include "floodplan/geodata.hpp"

namespace floodplan::damage {

/// Depth (m) to direct damage (GBP) for one use class. Piecewise linear,
/// clamped at the last point.
struct DamageCurve {
  geo::UseClass use_class = geo::UseClass::residential;
  std::vector<std::pair<double, double>> points;

  /// Throws ConfigError unless depths start at 0 and strictly increase and
  /// damages are non-negative and non-decreasing.
  void validate() const;
};

enum class CurveMode {
  per_building,     // curve value is GBP per building
  per_square_metre  // curve value is GBP per m^2 of footprint
};

struct DamageCurves {
  std::optional<DamageCurve> commercial;
  std::optional<DamageCurve> residential;
  CurveMode mode = CurveMode::per_building;
  std::string price_base = "2022";

  const DamageCurve& for_class(geo::UseClass c) const;
};

double interp_damage(const DamageCurve& curve, double depth);

/// Low exposure costs nothing; medium and high evaluate the curve at the
/// buffer 90th-percentile depth. `footprint_area` is only used in
/// per-square-metre mode.
double building_damage(const exposure::ExposureRecord& record, const DamageCurves& curves,
                       double footprint_area = 0.0);

struct BuildingDamage {
  std::string building_id;
  geo::UseClass use_class = geo::UseClass::residential;
  exposure::ExposureClass exposure_class = exposure::ExposureClass::low;
  double damage = 0.0;
};

struct ScenarioDamages {
  std::string scenario_id;
  double return_period = 0.0;
  std::vector<BuildingDamage> buildings;
  double commercial = 0.0;
  double residential = 0.0;
  double total = 0.0;
  exposure::ExposureCounts counts;
};

/// Sums per-building damages by use class and counts exposure classes.
/// Sums are accumulated in input order.
ScenarioDamages aggregate(std::span<const BuildingDamage> damages);

/// Classification + curve evaluation + aggregation for a whole raster.
ScenarioDamages assess(std::span<const double> max_depth,
                       std::span<const geo::BuildingFootprint> buildings,
                       const DamageCurves& curves, double footprint_cell_area);

/// CSV with a `depth_m,damage_gbp` header.
DamageCurve load_curve_csv(const std::filesystem::path& path, geo::UseClass use_class);

}  // namespace floodplan::damage
