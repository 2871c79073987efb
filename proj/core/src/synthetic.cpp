#include "floodplan/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "floodplan/error.hpp"
#include "floodplan/geojson.hpp"
#include "floodplan/raster_io.hpp"

namespace floodplan::synthetic {

namespace {

namespace fs = std::filesystem;

// Layout below is drawn on an 800 m square and scaled to size_m.
constexpr double kRef = 800.0;
constexpr double kValleyX = 450.0;

double scale(const CatchmentOptions& o) { return o.size_m / kRef; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

nlohmann::json feature(const Polygon& p, nlohmann::json props) {
  return {{"type", "Feature"}, {"geometry", polygon_to_geojson(p)}, {"properties", std::move(props)}};
}

}  // namespace

TerrainGrid make_terrain(const CatchmentOptions& opt) {
  if (!(opt.size_m > 0.0) || !(opt.cell_size > 0.0))
    throw ConfigError("catchment size and cell size must be positive");
  const auto n = static_cast<std::size_t>(std::llround(opt.size_m / opt.cell_size));
  TerrainGrid g;
  g.geo = {0.0, 0.0, opt.cell_size, n, n};
  g.elevation.resize(n * n);
  g.active.assign(n * n, 1);

  std::mt19937_64 rng(opt.seed);
  const double valley = kValleyX * scale(opt);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const double x = g.geo.center_x(c), y = g.geo.center_y(r);
      // Portable uniform draw in [-1, 1).
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
      g.elevation[g.geo.index(r, c)] =
          5.0 + 0.01 * y + 0.02 * std::abs(x - valley) + opt.noise_m * u;
    }
  return g;
}

std::vector<geo::BuildingInput> make_buildings(const CatchmentOptions& opt) {
  const double s = scale(opt);
  std::vector<geo::BuildingInput> out;
  auto add = [&](const std::string& id, geo::UseClass cls, double x0, double y0, double x1,
                 double y1) {
    out.push_back({id, cls, rectangle(x0 * s, y0 * s, x1 * s, y1 * s)});
  };
  // Valley frontage, just downstream of the centre tile.
  for (int k = 0; k < 5; ++k) {
    const double top = 286.0 - 26.0 * k;
    const auto west = k % 2 ? geo::UseClass::residential : geo::UseClass::commercial;
    const auto east = k % 2 ? geo::UseClass::commercial : geo::UseClass::residential;
    add("v" + std::to_string(2 * k + 1), west, 434, top - 16, 446, top);
    add("v" + std::to_string(2 * k + 2), east, 454, top - 16, 466, top);
  }
  // Ridge houses well away from any runoff.
  add("r1", geo::UseClass::residential, 114, 144, 126, 156);
  add("r2", geo::UseClass::residential, 694, 144, 706, 156);
  add("r3", geo::UseClass::residential, 144, 694, 156, 706);
  add("r4", geo::UseClass::commercial, 694, 694, 706, 706);
  return out;
}

std::vector<geo::LandUseFeature> make_landuse(const CatchmentOptions& opt) {
  const double s = scale(opt);
  return {
      {geo::LandClass::green, rectangle(0, 0, kRef * s, kRef * s)},
      // Centre tile: paved apart from a green park along its north edge.
      {geo::LandClass::paved, rectangle(300 * s, 300 * s, 600 * s, 540 * s)},
      // Car park in the east tile.
      {geo::LandClass::paved, rectangle(600 * s, 400 * s, 700 * s, 520 * s)},
  };
}

fs::path write_catchment_project(const fs::path& dir, const CatchmentOptions& opt) {
  fs::create_directories(dir / "curves");
  const TerrainGrid terrain = make_terrain(opt);
  {
    std::ofstream out(dir / "terrain.asc", std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / "terrain.asc").string());
    write_esri_ascii(out, terrain.geo, terrain.elevation);
  }

  nlohmann::json buildings = nlohmann::json::array();
  for (const auto& b : make_buildings(opt))
    buildings.push_back(feature(b.polygon, {{"id", b.id}, {"use_class", geo::to_string(b.use_class)}}));
  write_text(dir / "buildings.geojson",
             nlohmann::json{{"type", "FeatureCollection"}, {"features", buildings}}.dump(1));

  nlohmann::json landuse = nlohmann::json::array();
  for (const auto& f : make_landuse(opt))
    landuse.push_back(feature(f.polygon, {{"class", geo::to_string(f.land_class)}}));
  write_text(dir / "landuse.geojson",
             nlohmann::json{{"type", "FeatureCollection"}, {"features", landuse}}.dump(1));

  nlohmann::json storms = nlohmann::json::array();
  for (const auto& [rp, depth] : opt.storms)
    storms.push_back({{"return_period_years", rp},
                      {"duration_s", opt.storm_duration_s},
                      {"dt_s", opt.storm_duration_s},
                      {"profile", "uniform"},
                      {"depth_mm", depth}});
  write_text(dir / "storms.json", nlohmann::json{{"storms", storms}}.dump(2));

  write_text(dir / "curves" / "residential.csv",
             "depth_m,damage_gbp\n0,0\n0.1,5000\n0.3,20000\n0.6,35000\n1.2,50000\n");
  write_text(dir / "curves" / "commercial.csv",
             "depth_m,damage_gbp\n0,0\n0.1,15000\n0.3,60000\n0.6,110000\n1.2,180000\n");

  const double tile = opt.tile_size > 0.0 ? opt.tile_size : 0.375 * opt.size_m;
  const nlohmann::json project{
      {"schema_version", 1},
      {"id", "synthetic-catchment"},
      {"terrain", {{"path", "terrain.asc"}, {"format", "esri_ascii"}}},
      {"buildings", "buildings.geojson"},
      {"landuse", "landuse.geojson"},
      {"default_landuse", "green"},
      {"storms", "storms.json"},
      {"curves",
       {{"commercial", "curves/commercial.csv"},
        {"residential", "curves/residential.csv"},
        {"mode", "per_building"},
        {"price_base", "2022"}}},
      {"tile_size_m", tile},
      {"solver",
       {{"drain_down_s", opt.drain_down_s},
        {"open_boundaries", {{"north", false}, {"south", true}, {"east", false}, {"west", false}}}}},
      {"surface",
       {{"green", {{"manning", 0.035}, {"infiltration_mm_per_h", 400.0}, {"capacity_mm", 150.0}}},
        {"paved", {{"manning", 0.02}, {"infiltration_mm_per_h", 0.0}, {"capacity_mm", 0.0}}}}},
      {"gf_threshold", 0.5},
      {"registry", "registry"}};
  write_text(dir / "project.json", project.dump(2));
  return dir / "project.json";
}

}  // namespace floodplan::synthetic
