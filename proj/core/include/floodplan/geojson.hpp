#pragma once

#include <nlohmann/json.hpp>

#include "floodplan/geometry.hpp"

namespace floodplan {

/// Accepts a GeoJSON geometry object of type Polygon or MultiPolygon.
Polygon polygon_from_geojson(const nlohmann::json& geometry);

/// Emits a Polygon geometry (one ring per element of `polygon.rings`).
nlohmann::json polygon_to_geojson(const Polygon& polygon);

}  // namespace floodplan
