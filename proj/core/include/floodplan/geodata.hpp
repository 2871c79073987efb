#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "floodplan/geometry.hpp"
#include "floodplan/grid.hpp"

namespace floodplan::geo {

enum class UseClass : std::uint8_t { commercial, residential };

const char* to_string(UseClass c) noexcept;
UseClass parse_use_class(const std::string& s);

/// Building polygon as supplied by the user, before rasterization.
struct BuildingInput {
  std::string id;
  UseClass use_class = UseClass::residential;
  Polygon polygon;
};

struct BuildingFootprint {
  std::string id;
  UseClass use_class = UseClass::residential;
  Polygon polygon;
  /// Cells removed from the computational domain (the building hole).
  std::vector<std::size_t> footprint_cells;
  /// Active cells within one cell (8-neighbourhood) of the footprint.
  std::vector<std::size_t> buffer_cells;
};

struct RasterizedBuildings {
  std::vector<BuildingFootprint> buildings;
  std::vector<std::uint8_t> active;
  std::vector<std::string> warnings;
};

/// Burns building holes into the active mask. A cell belongs to the first
/// building (in input order) whose polygon contains the cell centre; buffers
/// are computed after all holes are cut so no buffer touches any footprint.
RasterizedBuildings rasterize_buildings(std::span<const BuildingInput> footprints,
                                        const TerrainGrid& grid);

enum class LandClass : std::uint8_t { green, paved, building, pond };

const char* to_string(LandClass c) noexcept;
LandClass parse_land_class(const std::string& s);

struct LandUseFeature {
  LandClass land_class = LandClass::green;
  Polygon polygon;
};

struct LandUseMap {
  std::vector<LandClass> cells;
};

/// Later features overwrite earlier ones; building footprint cells are always
/// `building` and cells not covered by any feature take `fallback`.
LandUseMap build_landuse(const GridGeometry& geo, std::span<const LandUseFeature> features,
                         std::span<const BuildingFootprint> buildings,
                         LandClass fallback = LandClass::paved);

struct Tile {
  int id = 0;
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  std::size_t active_cells = 0;
  std::size_t building_cells = 0;
};

struct TilePartition {
  double tile_size = 500.0;
  std::vector<Tile> tiles;
  /// Tile id per grid cell; 0 for cells in unpopulated tiles.
  std::vector<int> cell_to_tile;
  std::vector<double> green_fraction;

  const Tile& tile(int id) const;
  std::size_t index_of(int id) const;
};

/// Lays tiles out row-major from the lower-left origin (west to east, then
/// south to north). Remainder tiles on the east/north edges are kept. Only
/// tiles containing at least one active cell are retained and numbered
/// 1..T in layout order.
TilePartition partition_tiles(const TerrainGrid& grid, double tile_size,
                              std::span<const std::uint8_t> building_mask = {});

/// Green cells over all domain cells of the tile (active plus building).
std::vector<double> compute_green_fraction(const LandUseMap& landuse,
                                           const TilePartition& partition);

std::vector<BuildingInput> load_buildings_geojson(const std::filesystem::path& path);
std::vector<LandUseFeature> load_landuse_geojson(const std::filesystem::path& path);

}  // namespace floodplan::geo
