#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "floodplan/damage.hpp"
#include "floodplan/geodata.hpp"
#include "floodplan/hydro.hpp"
#include "floodplan/planner.hpp"
#include "floodplan/raster_io.hpp"

namespace floodplan {

/// A project file (JSON) bundling the inputs of one study. Relative paths
/// resolve against the directory holding the project file.
struct ProjectConfig {
  std::string id = "project";
  std::filesystem::path file;
  std::filesystem::path terrain;
  TerrainFormat terrain_format = TerrainFormat::esri_ascii;
  std::filesystem::path buildings;  // optional
  std::filesystem::path landuse;    // optional
  geo::LandClass default_landuse = geo::LandClass::paved;
  std::filesystem::path storms_file;  // empty when storms are inline
  nlohmann::json storms_inline;
  std::filesystem::path commercial_curve;
  std::filesystem::path residential_curve;
  damage::CurveMode curve_mode = damage::CurveMode::per_building;
  std::string price_base = "2022";
  planner::CostModel costs;
  double tile_size = 500.0;
  hydro::SolverSettings solver;
  hydro::SurfaceParams surface;
  double gf_threshold = 0.5;
  std::filesystem::path registry;
};

ProjectConfig parse_project(const nlohmann::json& doc, const std::filesystem::path& base_dir);
/// Throws ConfigError naming the file when it is missing or malformed.
ProjectConfig load_project(const std::filesystem::path& path);

/// Checks that every referenced file exists and parses, that a storm and a
/// damage curve exist for what the study needs. Throws ConfigError naming
/// the first offending file.
void validate_project(const ProjectConfig& config);

/// Loads and preprocesses all inputs: building holes, land use, tiles, green
/// fractions, roof-rain redirection and surface properties.
planner::Study build_study(const ProjectConfig& config);

nlohmann::json project_to_json(const ProjectConfig& config, const planner::Study& study);
nlohmann::json project_file_json(const ProjectConfig& config);

}  // namespace floodplan
