#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "floodplan/geodata.hpp"
#include "floodplan/grid.hpp"

namespace floodplan::synthetic {

/// Urban catchment used by the demos and the scenario-matrix checks:
/// a square domain draining south through a shallow valley along x = 450 m.
/// The centre tile is mostly paved and generates most of the runoff, a car
/// park in the east tile adds a little, and every other surface is green
/// with infiltration capacity above any configured storm. Buildings flank
/// the valley just downstream of the centre tile; a few sit on the ridges.
struct CatchmentOptions {
  double size_m = 800.0;
  double cell_size = 2.0;
  double tile_size = 0.0;  // 0: 3/8 of size_m, giving a 3 x 3 tile layout
  std::uint64_t seed = 1;
  double noise_m = 0.002;  // amplitude of the seeded ground roughness
  double storm_duration_s = 600.0;
  double drain_down_s = 300.0;
  /// (return period, depth mm) over storm_duration_s.
  std::vector<std::pair<double, double>> storms{{10, 20}, {20, 26}, {50, 34}, {100, 44}};
};

/// Id of the tile holding the dominant paved source for the default options.
inline constexpr int kDominantTile = 5;

TerrainGrid make_terrain(const CatchmentOptions& opt);
std::vector<geo::BuildingInput> make_buildings(const CatchmentOptions& opt);
std::vector<geo::LandUseFeature> make_landuse(const CatchmentOptions& opt);

/// Writes terrain.asc, buildings.geojson, landuse.geojson, storms.json,
/// curves/*.csv and project.json into `dir`; returns the project file path.
std::filesystem::path write_catchment_project(const std::filesystem::path& dir,
                                              const CatchmentOptions& opt = {});

}  // namespace floodplan::synthetic
