#include "floodplan/geodata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "floodplan/error.hpp"
#include "floodplan/geojson.hpp"

namespace floodplan {

Polygon polygon_from_geojson(const nlohmann::json& geometry) {
  if (!geometry.is_object() || !geometry.contains("type"))
    throw ParseError("geometry must be a GeoJSON object with a 'type'");
  const std::string type = geometry.at("type").get<std::string>();
  auto ring_from = [](const nlohmann::json& coords) {
    Ring ring;
    for (const auto& pt : coords) {
      if (!pt.is_array() || pt.size() < 2) throw ParseError("coordinate must be [x, y]");
      ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
    }
    if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
    return ring;
  };
  Polygon polygon;
  const auto& coords = geometry.at("coordinates");
  if (type == "Polygon") {
    for (const auto& ring : coords) polygon.rings.push_back(ring_from(ring));
  } else if (type == "MultiPolygon") {
    for (const auto& part : coords)
      for (const auto& ring : part) polygon.rings.push_back(ring_from(ring));
  } else {
    throw UnsupportedFormat("unsupported geometry type '" + type + "'");
  }
  return polygon;
}

nlohmann::json polygon_to_geojson(const Polygon& polygon) {
  nlohmann::json rings = nlohmann::json::array();
  for (const auto& ring : polygon.rings) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& p : ring) r.push_back({p.x, p.y});
    if (!ring.empty()) r.push_back({ring.front().x, ring.front().y});
    rings.push_back(std::move(r));
  }
  return {{"type", "Polygon"}, {"coordinates", std::move(rings)}};
}

namespace geo {

const char* to_string(UseClass c) noexcept {
  return c == UseClass::commercial ? "commercial" : "residential";
}

UseClass parse_use_class(const std::string& s) {
  if (s == "commercial") return UseClass::commercial;
  if (s == "residential") return UseClass::residential;
  throw ParseError("use_class must be 'commercial' or 'residential', got '" + s + "'");
}

const char* to_string(LandClass c) noexcept {
  switch (c) {
    case LandClass::green: return "green";
    case LandClass::paved: return "paved";
    case LandClass::building: return "building";
    case LandClass::pond: return "pond";
  }
  return "?";
}

LandClass parse_land_class(const std::string& s) {
  if (s == "green") return LandClass::green;
  if (s == "paved") return LandClass::paved;
  if (s == "building") return LandClass::building;
  if (s == "pond") return LandClass::pond;
  throw ParseError("unknown land use class '" + s + "'");
}

RasterizedBuildings rasterize_buildings(std::span<const BuildingInput> footprints,
                                        const TerrainGrid& grid) {
  const GridGeometry& geo = grid.geo;
  RasterizedBuildings out;
  out.active = grid.active;
  std::vector<std::uint8_t> claimed(geo.cell_count(), 0);

  out.buildings.reserve(footprints.size());
  for (const auto& in : footprints) {
    BuildingFootprint b;
    b.id = in.id;
    b.use_class = in.use_class;
    b.polygon = in.polygon;
    for (std::size_t cell : cells_in_polygon(in.polygon, geo)) {
      if (claimed[cell] || !grid.active[cell]) continue;
      claimed[cell] = 1;
      b.footprint_cells.push_back(cell);
    }
    if (b.footprint_cells.empty())
      out.warnings.push_back("building '" + b.id +
                             "' covers no active cell centre; kept with empty cell sets");
    out.buildings.push_back(std::move(b));
  }
  for (std::size_t i = 0; i < claimed.size(); ++i)
    if (claimed[i]) out.active[i] = 0;

  std::vector<std::uint32_t> stamp(geo.cell_count(), 0);
  std::uint32_t current = 0;
  for (auto& b : out.buildings) {
    ++current;
    for (std::size_t cell : b.footprint_cells) {
      const auto r = static_cast<std::ptrdiff_t>(geo.row_of(cell));
      const auto c = static_cast<std::ptrdiff_t>(geo.col_of(cell));
      for (std::ptrdiff_t dr = -1; dr <= 1; ++dr)
        for (std::ptrdiff_t dc = -1; dc <= 1; ++dc) {
          const auto rr = r + dr, cc = c + dc;
          if (rr < 0 || cc < 0 || rr >= static_cast<std::ptrdiff_t>(geo.n_rows) ||
              cc >= static_cast<std::ptrdiff_t>(geo.n_cols))
            continue;
          const std::size_t n = geo.index(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
          if (!out.active[n] || stamp[n] == current) continue;
          stamp[n] = current;
          b.buffer_cells.push_back(n);
        }
    }
    std::sort(b.buffer_cells.begin(), b.buffer_cells.end());
    if (b.buffer_cells.empty() && !b.footprint_cells.empty())
      out.warnings.push_back("building '" + b.id +
                             "' has no active buffer cells; classified low by definition");
  }
  return out;
}

LandUseMap build_landuse(const GridGeometry& geo, std::span<const LandUseFeature> features,
                         std::span<const BuildingFootprint> buildings, LandClass fallback) {
  LandUseMap map;
  map.cells.assign(geo.cell_count(), fallback);
  for (const auto& f : features)
    for (std::size_t cell : cells_in_polygon(f.polygon, geo)) map.cells[cell] = f.land_class;
  for (const auto& b : buildings)
    for (std::size_t cell : b.footprint_cells) map.cells[cell] = LandClass::building;
  // A feature may not claim building class on cells that are not footprints.
  std::vector<std::uint8_t> is_footprint(geo.cell_count(), 0);
  for (const auto& b : buildings)
    for (std::size_t cell : b.footprint_cells) is_footprint[cell] = 1;
  for (std::size_t i = 0; i < map.cells.size(); ++i)
    if (map.cells[i] == LandClass::building && !is_footprint[i]) map.cells[i] = fallback;
  return map;
}

const Tile& TilePartition::tile(int id) const { return tiles.at(index_of(id)); }

std::size_t TilePartition::index_of(int id) const {
  if (id < 1 || static_cast<std::size_t>(id) > tiles.size())
    throw NotFound("unknown tile id " + std::to_string(id));
  return static_cast<std::size_t>(id - 1);
}

TilePartition partition_tiles(const TerrainGrid& grid, double tile_size,
                              std::span<const std::uint8_t> building_mask) {
  const GridGeometry& geo = grid.geo;
  if (!(tile_size >= 2.0 * geo.cell_size))
    throw ConfigError("tile_size must be at least twice the cell size (" +
                      std::to_string(2.0 * geo.cell_size) + " m)");
  if (!building_mask.empty() && building_mask.size() != geo.cell_count())
    throw DomainError("building mask does not match grid");

  const auto tiles_x = static_cast<std::size_t>(std::ceil(geo.width() / tile_size - 1e-9));
  const auto tiles_y = static_cast<std::size_t>(std::ceil(geo.height() / tile_size - 1e-9));

  // Layout index (south-to-north rows, west-to-east columns) per cell.
  std::vector<std::size_t> layout(geo.cell_count());
  std::vector<std::size_t> active_count(tiles_x * tiles_y, 0), building_count(tiles_x * tiles_y, 0);
  for (std::size_t r = 0; r < geo.n_rows; ++r) {
    const double dy = (static_cast<double>(geo.n_rows - r) - 0.5) * geo.cell_size;
    const auto ty = std::min(static_cast<std::size_t>(dy / tile_size), tiles_y - 1);
    for (std::size_t c = 0; c < geo.n_cols; ++c) {
      const double dx = (static_cast<double>(c) + 0.5) * geo.cell_size;
      const auto tx = std::min(static_cast<std::size_t>(dx / tile_size), tiles_x - 1);
      const std::size_t cell = geo.index(r, c);
      layout[cell] = ty * tiles_x + tx;
      if (grid.active[cell])
        ++active_count[layout[cell]];
      else if (!building_mask.empty() && building_mask[cell])
        ++building_count[layout[cell]];
    }
  }

  TilePartition p;
  p.tile_size = tile_size;
  std::vector<int> id_of_layout(tiles_x * tiles_y, 0);
  for (std::size_t ty = 0; ty < tiles_y; ++ty)
    for (std::size_t tx = 0; tx < tiles_x; ++tx) {
      const std::size_t k = ty * tiles_x + tx;
      if (active_count[k] == 0) continue;
      Tile t;
      t.id = static_cast<int>(p.tiles.size()) + 1;
      t.min_x = geo.origin_x + static_cast<double>(tx) * tile_size;
      t.min_y = geo.origin_y + static_cast<double>(ty) * tile_size;
      t.max_x = std::min(t.min_x + tile_size, geo.origin_x + geo.width());
      t.max_y = std::min(t.min_y + tile_size, geo.origin_y + geo.height());
      t.active_cells = active_count[k];
      t.building_cells = building_count[k];
      id_of_layout[k] = t.id;
      p.tiles.push_back(t);
    }

  p.cell_to_tile.resize(geo.cell_count());
  for (std::size_t cell = 0; cell < layout.size(); ++cell) {
    const bool in_domain = grid.active[cell] || (!building_mask.empty() && building_mask[cell]);
    p.cell_to_tile[cell] = in_domain ? id_of_layout[layout[cell]] : 0;
  }
  p.green_fraction.assign(p.tiles.size(), 0.0);
  return p;
}

std::vector<double> compute_green_fraction(const LandUseMap& landuse,
                                           const TilePartition& partition) {
  std::vector<std::size_t> green(partition.tiles.size(), 0), total(partition.tiles.size(), 0);
  for (std::size_t cell = 0; cell < partition.cell_to_tile.size(); ++cell) {
    const int id = partition.cell_to_tile[cell];
    if (id == 0) continue;
    const auto k = static_cast<std::size_t>(id - 1);
    ++total[k];
    if (landuse.cells[cell] == LandClass::green) ++green[k];
  }
  std::vector<double> gf(partition.tiles.size(), 0.0);
  for (std::size_t k = 0; k < gf.size(); ++k)
    gf[k] = total[k] ? static_cast<double>(green[k]) / static_cast<double>(total[k]) : 0.0;
  return gf;
}

namespace {

nlohmann::json read_feature_collection(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open GeoJSON '" + path.string() + "'", path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (doc.value("type", "") != "FeatureCollection" || !doc.contains("features"))
    throw ParseError(path.string() + ": expected a GeoJSON FeatureCollection");
  return doc;
}

}  // namespace

std::vector<BuildingInput> load_buildings_geojson(const std::filesystem::path& path) {
  const auto doc = read_feature_collection(path);
  std::vector<BuildingInput> out;
  std::size_t n = 0;
  for (const auto& f : doc.at("features")) {
    ++n;
    const auto& props = f.contains("properties") && f["properties"].is_object()
                            ? f["properties"]
                            : nlohmann::json::object();
    BuildingInput b;
    if (props.contains("id"))
      b.id = props["id"].is_string() ? props["id"].get<std::string>() : props["id"].dump();
    else if (f.contains("id"))
      b.id = f["id"].is_string() ? f["id"].get<std::string>() : f["id"].dump();
    else
      b.id = "b" + std::to_string(n);
    if (!props.contains("use_class"))
      throw ParseError(path.string() + ": building '" + b.id + "' lacks 'use_class'");
    b.use_class = parse_use_class(props["use_class"].get<std::string>());
    b.polygon = polygon_from_geojson(f.at("geometry"));
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<LandUseFeature> load_landuse_geojson(const std::filesystem::path& path) {
  const auto doc = read_feature_collection(path);
  std::vector<LandUseFeature> out;
  for (const auto& f : doc.at("features")) {
    const auto& props = f.at("properties");
    std::string cls = props.contains("class") ? props["class"].get<std::string>()
                                              : props.at("landuse").get<std::string>();
    out.push_back({parse_land_class(cls), polygon_from_geojson(f.at("geometry"))});
  }
  return out;
}

}  // namespace geo
}  // namespace floodplan
