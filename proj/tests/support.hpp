#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "floodplan/grid.hpp"
#include "floodplan/hydro.hpp"
#include "floodplan/project.hpp"
#include "floodplan/synthetic.hpp"

namespace floodplan::testing {

inline TerrainGrid flat_grid(std::size_t rows, std::size_t cols, double cell = 1.0,
                             double z = 0.0) {
  TerrainGrid g;
  g.geo = {0.0, 0.0, cell, rows, cols};
  g.elevation.assign(rows * cols, z);
  g.active.assign(rows * cols, 1);
  return g;
}

inline hydro::SurfaceProperties uniform_props(std::size_t n, double manning = 0.0,
                                              double infil_m_per_s = 0.0, double capacity_m = 0.0) {
  hydro::SurfaceProperties p;
  p.manning.assign(n, manning);
  p.infiltration_rate.assign(n, infil_m_per_s);
  p.infiltration_capacity.assign(n, capacity_m);
  p.pond.assign(n, 0);
  return p;
}

inline hydro::SolverSettings closed_settings() {
  hydro::SolverSettings s;
  s.open = {false, false, false, false};
  return s;
}

// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
#ifdef FLOODPLAN_TEST_TMP
  std::filesystem::path base = FLOODPLAN_TEST_TMP;
#else
  std::filesystem::path base = std::filesystem::temp_directory_path() / "floodplan-tests";
#endif
  const auto dir = base / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// The synthetic catchment scaled down to `size_m`; registry inside `dir`.
inline ProjectConfig small_catchment(const std::filesystem::path& dir, double size_m = 160.0) {
  synthetic::CatchmentOptions opt;
  opt.size_m = size_m;
  return load_project(synthetic::write_catchment_project(dir, opt));
}

}  // namespace floodplan::testing
