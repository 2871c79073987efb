#include "floodplan/damage.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "floodplan/error.hpp"

namespace floodplan::damage {

void DamageCurve::validate() const {
  const std::string name = geo::to_string(use_class);
  if (points.empty()) throw ConfigError(name + " damage curve has no points");
  if (points.front().first != 0.0)
    throw ConfigError(name + " damage curve must start at depth 0");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& [d, v] = points[i];
    if (!std::isfinite(d) || !std::isfinite(v) || v < 0.0)
      throw ConfigError(name + " damage curve has an invalid point");
    if (i > 0 && !(d > points[i - 1].first))
      throw ConfigError(name + " damage curve depths must strictly increase");
    if (i > 0 && v < points[i - 1].second)
      throw ConfigError(name + " damage curve must be non-decreasing");
  }
}

const DamageCurve& DamageCurves::for_class(geo::UseClass c) const {
  const auto& curve = c == geo::UseClass::commercial ? commercial : residential;
  if (!curve)
    throw ConfigError(std::string("no damage curve configured for ") + geo::to_string(c) +
                      " buildings");
  return *curve;
}

double interp_damage(const DamageCurve& curve, double depth) {
  if (!(depth >= 0.0)) throw DomainError("depth must be non-negative");
  const auto& pts = curve.points;
  if (depth >= pts.back().first) return pts.back().second;
  const auto hi = std::upper_bound(pts.begin(), pts.end(), depth,
                                   [](double d, const auto& p) { return d < p.first; });
  const auto lo = hi - 1;
  const double t = (depth - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

double building_damage(const exposure::ExposureRecord& record, const DamageCurves& curves,
                       double footprint_area) {
  const DamageCurve& curve = curves.for_class(record.use_class);
  if (record.exposure_class == exposure::ExposureClass::low) return 0.0;
  const double value = interp_damage(curve, record.p90_depth);
  return curves.mode == CurveMode::per_square_metre ? value * footprint_area : value;
}

ScenarioDamages aggregate(std::span<const BuildingDamage> damages) {
  ScenarioDamages s;
  s.buildings.assign(damages.begin(), damages.end());
  for (const auto& d : damages) {
    if (d.use_class == geo::UseClass::commercial)
      s.commercial += d.damage;
    else
      s.residential += d.damage;
    switch (d.exposure_class) {
      case exposure::ExposureClass::low: ++s.counts.low; break;
      case exposure::ExposureClass::medium: ++s.counts.medium; break;
      case exposure::ExposureClass::high: ++s.counts.high; break;
    }
  }
  s.total = s.commercial + s.residential;
  return s;
}

ScenarioDamages assess(std::span<const double> max_depth,
                       std::span<const geo::BuildingFootprint> buildings,
                       const DamageCurves& curves, double footprint_cell_area) {
  const auto records = exposure::classify_all(max_depth, buildings);
  std::vector<BuildingDamage> per_building;
  per_building.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double area = curves.mode == CurveMode::per_square_metre
                            ? static_cast<double>(buildings[i].footprint_cells.size()) *
                                  footprint_cell_area
                            : 0.0;
    per_building.push_back({records[i].building_id, records[i].use_class,
                            records[i].exposure_class, building_damage(records[i], curves, area)});
  }
  return aggregate(per_building);
}

DamageCurve load_curve_csv(const std::filesystem::path& path, geo::UseClass use_class) {
  std::ifstream in(path);
  if (!in) throw ConfigError("damage curve file not found: " + path.string(), path.string());
  DamageCurve curve;
  curve.use_class = use_class;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (line.find("depth") != std::string::npos) continue;
    }
    std::istringstream ls(line);
    std::string a, b;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ','))
      throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                           ": expected 'depth_m,damage_gbp'",
                       line_no);
    try {
      curve.points.emplace_back(std::stod(a), std::stod(b));
    } catch (const std::exception&) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": not numeric",
                       line_no);
    }
  }
  curve.validate();
  return curve;
}

}  // namespace floodplan::damage
