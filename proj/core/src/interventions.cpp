#include "floodplan/interventions.hpp"

#include <nlohmann/json.hpp>

#include "floodplan/error.hpp"
#include "floodplan/geojson.hpp"

namespace floodplan {

const char* to_string(InterventionType t) noexcept {
  switch (t) {
    case InterventionType::permeable_pavement: return "permeable_pavement";
    case InterventionType::detention_pond: return "detention_pond";
    case InterventionType::rain_capture: return "rain_capture";
  }
  return "?";
}

InterventionType parse_intervention_type(const std::string& s) {
  if (s == "permeable_pavement" || s == "pavement") return InterventionType::permeable_pavement;
  if (s == "detention_pond" || s == "pond") return InterventionType::detention_pond;
  if (s == "rain_capture" || s == "capture") return InterventionType::rain_capture;
  throw ConfigError("unknown intervention type '" + s + "'");
}

double InterventionSpec::area() const {
  return type == InterventionType::rain_capture ? 0.0 : geometry.area();
}

void InterventionSpec::validate() const {
  if (type == InterventionType::rain_capture) {
    if (tile_id < 1) throw ConfigError("rain capture '" + id + "' needs a tile id");
    if (!(fraction >= 0.0 && fraction <= 1.0))
      throw ConfigError("rain capture fraction must lie in [0, 1]");
    return;
  }
  if (!(area() > 0.0)) throw GeometryError("intervention '" + id + "' has zero area");
  if (type == InterventionType::detention_pond && !(pond_volume > 0.0))
    throw GeometryError("pond '" + id + "' needs a positive volume");
}

InterventionSpec intervention_from_json(const nlohmann::json& j) {
  InterventionSpec s;
  s.id = j.value("id", "");
  s.type = parse_intervention_type(j.at("type").get<std::string>());
  if (s.type == InterventionType::rain_capture) {
    s.tile_id = j.at("tile_id").get<int>();
    s.fraction = j.value("fraction", 1.0);
  } else {
    s.geometry = polygon_from_geojson(j.at("geometry"));
  }
  if (s.type == InterventionType::detention_pond) s.pond_volume = j.at("volume_m3").get<double>();
  if (s.type == InterventionType::permeable_pavement && j.contains("infiltration_mm_per_h")) {
    hydro::SurfaceClass p;
    p.infiltration_mm_per_h = j.at("infiltration_mm_per_h").get<double>();
    p.capacity_mm = j.value("capacity_mm", 150.0);
    p.manning = j.value("manning", 0.02);
    s.pavement = p;
  }
  return s;
}

nlohmann::json intervention_to_json(const InterventionSpec& s) {
  nlohmann::json j{{"id", s.id}, {"type", to_string(s.type)}};
  if (s.type == InterventionType::rain_capture) {
    j["tile_id"] = s.tile_id;
    j["fraction"] = s.fraction;
  } else {
    j["geometry"] = polygon_to_geojson(s.geometry);
    j["area_m2"] = s.area();
  }
  if (s.type == InterventionType::detention_pond) {
    j["volume_m3"] = s.pond_volume;
    j["depth_m"] = s.pond_volume / s.area();
  }
  if (s.pavement) {
    j["infiltration_mm_per_h"] = s.pavement->infiltration_mm_per_h;
    j["capacity_mm"] = s.pavement->capacity_mm;
    j["manning"] = s.pavement->manning;
  }
  return j;
}

namespace hydro {

ModifiedDomain apply_interventions(const TerrainGrid& grid, const hydro::SurfaceProperties& props,
                                   const geo::LandUseMap& landuse,
                                   std::span<const InterventionSpec> specs,
                                   const hydro::SurfaceParams& params) {
  ModifiedDomain out{grid, props, landuse};
  for (const auto& spec : specs) {
    spec.validate();
    if (spec.type == InterventionType::rain_capture) continue;

    const auto cells = cells_in_polygon(spec.geometry, grid.geo);
    std::vector<std::size_t> active;
    for (std::size_t c : cells) {
      if (landuse.cells[c] == geo::LandClass::building &&
          spec.type == InterventionType::detention_pond)
        throw GeometryError("pond '" + spec.id + "' overlaps a building footprint");
      if (grid.active[c]) active.push_back(c);
    }
    if (active.empty())
      throw GeometryError("intervention '" + spec.id + "' does not cover any active cell");

    if (spec.type == InterventionType::permeable_pavement) {
      const hydro::SurfaceClass& p = spec.pavement ? *spec.pavement : params.pavement;
      for (std::size_t c : active) {
        out.props.manning[c] = p.manning;
        out.props.infiltration_rate[c] = storm::mm_per_hour_to_m_per_s(p.infiltration_mm_per_h);
        out.props.infiltration_capacity[c] = p.capacity_mm / 1000.0;
      }
    } else {
      const double depth = spec.pond_volume / spec.area();
      for (std::size_t c : active) {
        out.grid.elevation[c] -= depth;
        out.landuse.cells[c] = geo::LandClass::pond;
        out.props.manning[c] = params.pond.manning;
        out.props.infiltration_rate[c] =
            storm::mm_per_hour_to_m_per_s(params.pond.infiltration_mm_per_h);
        out.props.infiltration_capacity[c] = params.pond.capacity_mm / 1000.0;
        out.props.pond[c] = 1;
      }
    }
  }
  return out;
}

}  // namespace hydro
}  // namespace floodplan
