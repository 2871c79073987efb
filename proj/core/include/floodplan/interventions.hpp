#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "floodplan/geodata.hpp"
#include "floodplan/geometry.hpp"
#include "floodplan/hydro.hpp"

namespace floodplan {

enum class InterventionType { permeable_pavement, detention_pond, rain_capture };

const char* to_string(InterventionType t) noexcept;
InterventionType parse_intervention_type(const std::string& s);

/// A costed Blue-Green feature. Geometric types carry a polygon; rain
/// capture is the idealised per-tile rainfall reduction.
struct InterventionSpec {
  std::string id;
  InterventionType type = InterventionType::permeable_pavement;
  Polygon geometry;
  int tile_id = 0;          // rain_capture
  double fraction = 1.0;    // rain_capture
  double pond_volume = 0.0; // m^3, detention_pond
  std::optional<hydro::SurfaceClass> pavement;  // overrides the default pavement class

  /// Plan area of the geometry in m^2 (0 for rain capture).
  double area() const;
  /// Throws GeometryError/ConfigError when the invariants fail.
  void validate() const;
};

InterventionSpec intervention_from_json(const nlohmann::json& j);
nlohmann::json intervention_to_json(const InterventionSpec& spec);

namespace hydro {

struct ModifiedDomain {
  TerrainGrid grid;
  SurfaceProperties props;
  geo::LandUseMap landuse;
};

/// Pure transformation of the inputs. Pavement replaces the infiltration
/// parameters of its active cells; a pond lowers the ground of its active
/// cells by volume/area and marks them as pond storage. Rain-capture specs
/// do not alter the domain.
ModifiedDomain apply_interventions(const TerrainGrid& grid, const hydro::SurfaceProperties& props,
                                   const geo::LandUseMap& landuse,
                                   std::span<const InterventionSpec> specs,
                                   const hydro::SurfaceParams& params);

}  // namespace hydro
}  // namespace floodplan
