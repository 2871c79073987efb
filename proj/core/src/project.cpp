#include "floodplan/project.hpp"

#include <fstream>
#include <set>

#include "floodplan/error.hpp"

namespace floodplan {

namespace {

namespace fs = std::filesystem;

fs::path resolve_path(const nlohmann::json& value, const fs::path& base, const char* what) {
  if (!value.is_string()) throw ConfigError(std::string(what) + " must be a file path");
  fs::path p = value.get<std::string>();
  return p.is_absolute() ? p : base / p;
}

template <typename T>
void read_opt(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void read_surface_class(const nlohmann::json& obj, const char* key, hydro::SurfaceClass& c) {
  if (!obj.contains(key)) return;
  const auto& j = obj.at(key);
  read_opt(j, "manning", c.manning);
  read_opt(j, "infiltration_mm_per_h", c.infiltration_mm_per_h);
  read_opt(j, "capacity_mm", c.capacity_mm);
  if (!(c.manning >= 0.0) || c.infiltration_mm_per_h < 0.0 || c.capacity_mm < 0.0)
    throw ConfigError(std::string("surface class '") + key +
                      "' needs manning >= 0 and non-negative infiltration");
}

nlohmann::json surface_class_json(const hydro::SurfaceClass& c) {
  return {{"manning", c.manning},
          {"infiltration_mm_per_h", c.infiltration_mm_per_h},
          {"capacity_mm", c.capacity_mm}};
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p))
    throw ConfigError(what + " not found: " + p.string(), p.string());
}

std::vector<storm::Hyetograph> load_storms(const ProjectConfig& c) {
  if (!c.storms_file.empty()) return storm::load_storm_config(c.storms_file);
  return storm::parse_storm_config(c.storms_inline);
}

}  // namespace

ProjectConfig parse_project(const nlohmann::json& doc, const fs::path& base_dir) {
  static const std::set<std::string> known{
      "schema_version", "id",       "terrain",      "buildings", "landuse",  "default_landuse",
      "storms",         "curves",   "costs",        "tile_size_m", "solver", "surface",
      "gf_threshold",   "registry"};
  if (!doc.is_object()) throw ConfigError("project file must hold a JSON object");
  for (const auto& [k, v] : doc.items())
    if (!known.count(k)) throw ConfigError("unknown project field '" + k + "'");
  const int version = doc.value("schema_version", 1);
  if (version != 1)
    throw ConfigError("unsupported project schema_version " + std::to_string(version));

  ProjectConfig c;
  c.id = doc.value("id", c.id);
  if (!doc.contains("terrain")) throw ConfigError("project lacks 'terrain'");
  const auto& t = doc.at("terrain");
  if (t.is_string()) {
    c.terrain = resolve_path(t, base_dir, "terrain");
    const auto ext = c.terrain.extension().string();
    c.terrain_format = (ext == ".tif" || ext == ".tiff") ? TerrainFormat::geotiff
                                                         : TerrainFormat::esri_ascii;
  } else {
    c.terrain = resolve_path(t.at("path"), base_dir, "terrain.path");
    c.terrain_format = parse_terrain_format(t.value("format", "esri_ascii"));
  }
  if (doc.contains("buildings")) c.buildings = resolve_path(doc["buildings"], base_dir, "buildings");
  if (doc.contains("landuse")) c.landuse = resolve_path(doc["landuse"], base_dir, "landuse");
  if (doc.contains("default_landuse"))
    c.default_landuse = geo::parse_land_class(doc["default_landuse"].get<std::string>());

  if (!doc.contains("storms")) throw ConfigError("project lacks 'storms'");
  if (doc["storms"].is_string())
    c.storms_file = resolve_path(doc["storms"], base_dir, "storms");
  else
    c.storms_inline = doc["storms"];

  if (doc.contains("curves")) {
    const auto& cv = doc["curves"];
    if (cv.contains("commercial"))
      c.commercial_curve = resolve_path(cv["commercial"], base_dir, "curves.commercial");
    if (cv.contains("residential"))
      c.residential_curve = resolve_path(cv["residential"], base_dir, "curves.residential");
    const std::string mode = cv.value("mode", "per_building");
    if (mode == "per_building")
      c.curve_mode = damage::CurveMode::per_building;
    else if (mode == "per_square_metre" || mode == "per_m2")
      c.curve_mode = damage::CurveMode::per_square_metre;
    else
      throw ConfigError("unknown curve mode '" + mode + "'");
    c.price_base = cv.value("price_base", c.price_base);
  }

  if (doc.contains("costs")) {
    const auto& j = doc["costs"];
    auto& m = c.costs;
    read_opt(j, "pavement_install_per_m2", m.pavement_install_per_m2);
    read_opt(j, "pavement_annual_per_m2", m.pavement_annual_per_m2);
    read_opt(j, "pavement_life_years", m.pavement_life_years);
    read_opt(j, "pond_install_gbp", m.pond_install_gbp);
    read_opt(j, "pond_install_per_m3", m.pond_install_per_m3);
    read_opt(j, "pond_annual_per_m2", m.pond_annual_per_m2);
    read_opt(j, "pond_life_years", m.pond_life_years);
    if (m.pavement_install_per_m2 < 0 || m.pavement_annual_per_m2 < 0 || m.pond_install_gbp < 0 ||
        !(m.pond_install_per_m3 > 0) || m.pond_annual_per_m2 < 0)
      throw ConfigError("cost rates must be non-negative");
  }

  read_opt(doc, "tile_size_m", c.tile_size);
  read_opt(doc, "gf_threshold", c.gf_threshold);

  if (doc.contains("solver")) {
    const auto& j = doc["solver"];
    auto& s = c.solver;
    read_opt(j, "cfl", s.cfl);
    read_opt(j, "dry_threshold_m", s.dry_threshold);
    read_opt(j, "dt_max_s", s.dt_max);
    read_opt(j, "gravity", s.gravity);
    read_opt(j, "drain_down_s", s.drain_down);
    read_opt(j, "conservation_tolerance", s.conservation_tolerance);
    read_opt(j, "max_steps", s.max_steps);
    read_opt(j, "threads", s.threads);
    if (j.contains("open_boundaries")) {
      const auto& o = j["open_boundaries"];
      read_opt(o, "north", s.open.north);
      read_opt(o, "south", s.open.south);
      read_opt(o, "east", s.open.east);
      read_opt(o, "west", s.open.west);
    }
    if (!(s.cfl > 0.0 && s.cfl <= 1.0)) throw ConfigError("solver.cfl must lie in (0, 1]");
    if (!(s.dt_max > 0.0) || s.drain_down < 0.0 || !(s.dry_threshold > 0.0))
      throw ConfigError("solver time settings must be positive");
  }

  if (doc.contains("surface")) {
    const auto& j = doc["surface"];
    read_surface_class(j, "green", c.surface.green);
    read_surface_class(j, "paved", c.surface.paved);
    read_surface_class(j, "pond", c.surface.pond);
    read_surface_class(j, "pavement", c.surface.pavement);
  }

  c.registry = doc.contains("registry") ? resolve_path(doc["registry"], base_dir, "registry")
                                        : base_dir / "registry";
  return c;
}

ProjectConfig load_project(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("project file not found: " + path.string(), path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what(), path.string());
  }
  try {
    ProjectConfig c = parse_project(doc, fs::absolute(path).parent_path());
    c.file = path;
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what(), path.string());
  }
}

void validate_project(const ProjectConfig& c) {
  require_file(c.terrain, "terrain file");
  if (!c.buildings.empty()) require_file(c.buildings, "buildings file");
  if (!c.landuse.empty()) require_file(c.landuse, "land-use file");
  if (!c.storms_file.empty()) require_file(c.storms_file, "storm config");
  if (!c.commercial_curve.empty()) require_file(c.commercial_curve, "damage curve file");
  if (!c.residential_curve.empty()) require_file(c.residential_curve, "damage curve file");

  if (load_storms(c).empty()) throw ConfigError("project declares no storms");
  if (!c.commercial_curve.empty())
    damage::load_curve_csv(c.commercial_curve, geo::UseClass::commercial);
  if (!c.residential_curve.empty())
    damage::load_curve_csv(c.residential_curve, geo::UseClass::residential);

  if (!c.buildings.empty()) {
    const auto buildings = geo::load_buildings_geojson(c.buildings);
    for (const auto& b : buildings) {
      const bool commercial = b.use_class == geo::UseClass::commercial;
      const auto& curve = commercial ? c.commercial_curve : c.residential_curve;
      if (curve.empty())
        throw ConfigError(std::string("no damage curve configured for ") +
                              geo::to_string(b.use_class) + " buildings",
                          c.file.string());
    }
  }
  if (!(c.tile_size > 0.0)) throw ConfigError("tile_size_m must be positive");
  if (c.gf_threshold < 0.0 || c.gf_threshold > 1.0)
    throw ConfigError("gf_threshold must lie in [0, 1]");
}

planner::Study build_study(const ProjectConfig& c) {
  validate_project(c);
  planner::Study s;
  s.grid = load_terrain(c.terrain, c.terrain_format);
  s.grid.validate();

  std::vector<geo::BuildingInput> inputs;
  if (!c.buildings.empty()) inputs = geo::load_buildings_geojson(c.buildings);
  auto rasterized = geo::rasterize_buildings(inputs, s.grid);
  s.grid.active = std::move(rasterized.active);
  s.buildings = std::move(rasterized.buildings);
  s.warnings = std::move(rasterized.warnings);
  if (s.grid.active_count() == 0) throw DomainError("the terrain has no active cell");

  std::vector<geo::LandUseFeature> features;
  if (!c.landuse.empty()) features = geo::load_landuse_geojson(c.landuse);
  s.landuse = geo::build_landuse(s.grid.geo, features, s.buildings, c.default_landuse);

  std::vector<std::uint8_t> building_mask(s.grid.geo.cell_count(), 0);
  for (const auto& b : s.buildings)
    for (std::size_t cell : b.footprint_cells) building_mask[cell] = 1;
  s.partition = geo::partition_tiles(s.grid, c.tile_size, building_mask);
  s.partition.green_fraction = geo::compute_green_fraction(s.landuse, s.partition);

  s.redirection = storm::build_redirection(s.buildings, s.grid);
  s.surface = c.surface;
  s.props = hydro::make_surface_properties(s.landuse, s.surface);
  s.solver = c.solver;
  s.storms = load_storms(c);

  s.curves.mode = c.curve_mode;
  s.curves.price_base = c.price_base;
  if (!c.commercial_curve.empty())
    s.curves.commercial = damage::load_curve_csv(c.commercial_curve, geo::UseClass::commercial);
  if (!c.residential_curve.empty())
    s.curves.residential = damage::load_curve_csv(c.residential_curve, geo::UseClass::residential);
  s.costs = c.costs;
  s.gf_threshold = c.gf_threshold;
  return s;
}

nlohmann::json project_file_json(const ProjectConfig& c) {
  const auto& s = c.solver;
  const auto& m = c.costs;
  nlohmann::json j{
      {"schema_version", 1},
      {"id", c.id},
      {"terrain",
       {{"path", c.terrain.string()},
        {"format", c.terrain_format == TerrainFormat::geotiff ? "geotiff" : "esri_ascii"}}},
      {"default_landuse", geo::to_string(c.default_landuse)},
      {"curves",
       {{"mode", c.curve_mode == damage::CurveMode::per_building ? "per_building"
                                                                 : "per_square_metre"},
        {"price_base", c.price_base}}},
      {"costs",
       {{"pavement_install_per_m2", m.pavement_install_per_m2},
        {"pavement_annual_per_m2", m.pavement_annual_per_m2},
        {"pavement_life_years", m.pavement_life_years},
        {"pond_install_gbp", m.pond_install_gbp},
        {"pond_install_per_m3", m.pond_install_per_m3},
        {"pond_annual_per_m2", m.pond_annual_per_m2},
        {"pond_life_years", m.pond_life_years}}},
      {"tile_size_m", c.tile_size},
      {"solver",
       {{"cfl", s.cfl},
        {"dry_threshold_m", s.dry_threshold},
        {"dt_max_s", s.dt_max},
        {"gravity", s.gravity},
        {"drain_down_s", s.drain_down},
        {"conservation_tolerance", s.conservation_tolerance},
        {"max_steps", s.max_steps},
        {"threads", s.threads},
        {"open_boundaries",
         {{"north", s.open.north}, {"south", s.open.south}, {"east", s.open.east},
          {"west", s.open.west}}}}},
      {"surface",
       {{"green", surface_class_json(c.surface.green)},
        {"paved", surface_class_json(c.surface.paved)},
        {"pond", surface_class_json(c.surface.pond)},
        {"pavement", surface_class_json(c.surface.pavement)}}},
      {"gf_threshold", c.gf_threshold},
      {"registry", c.registry.string()}};
  if (!c.buildings.empty()) j["buildings"] = c.buildings.string();
  if (!c.landuse.empty()) j["landuse"] = c.landuse.string();
  if (!c.storms_file.empty())
    j["storms"] = c.storms_file.string();
  else
    j["storms"] = c.storms_inline;
  if (!c.commercial_curve.empty()) j["curves"]["commercial"] = c.commercial_curve.string();
  if (!c.residential_curve.empty()) j["curves"]["residential"] = c.residential_curve.string();
  return j;
}

nlohmann::json project_to_json(const ProjectConfig& c, const planner::Study& study) {
  const auto& g = study.grid.geo;
  nlohmann::json storms = nlohmann::json::array();
  for (const auto& h : study.storms) storms.push_back(storm::storm_to_json(h));
  std::size_t commercial = 0;
  for (const auto& b : study.buildings) commercial += b.use_class == geo::UseClass::commercial;
  nlohmann::json j{
      {"schema_version", 1},
      {"id", c.id},
      {"grid",
       {{"origin_x", g.origin_x},
        {"origin_y", g.origin_y},
        {"cell_size_m", g.cell_size},
        {"n_rows", g.n_rows},
        {"n_cols", g.n_cols},
        {"active_cells", study.grid.active_count()},
        {"area_km2", static_cast<double>(study.grid.active_count()) * g.cell_area() / 1e6}}},
      {"tiles", study.partition.tiles.size()},
      {"tile_size_m", study.partition.tile_size},
      {"buildings",
       {{"total", study.buildings.size()},
        {"commercial", commercial},
        {"residential", study.buildings.size() - commercial}}},
      {"return_periods_years", study.return_periods()},
      {"storms", std::move(storms)},
      {"gf_threshold", study.gf_threshold},
      {"price_base", study.curves.price_base},
      {"warnings", study.warnings},
      {"config", project_file_json(c)}};
  return j;
}

}  // namespace floodplan
