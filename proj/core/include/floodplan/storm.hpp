#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "floodplan/geodata.hpp"
#include "floodplan/grid.hpp"

namespace floodplan::storm {

/// Piecewise-constant rainfall intensity. Step k covers [k*dt, (k+1)*dt).
struct Hyetograph {
  double return_period = 0.0;  // years
  double duration = 0.0;       // s
  double dt = 0.0;             // s
  std::vector<double> intensity;  // mm/h per step

  double total_depth() const noexcept;  // mm
  /// Intensity in mm/h at time t; zero outside [0, duration).
  double intensity_at(double t) const noexcept;
  /// Next time > t at which the intensity may change (step edge or storm
  /// end); +inf after the storm.
  double next_change(double t) const noexcept;
  void validate() const;
};

Hyetograph make_uniform_hyetograph(double depth_mm, double duration_s, double dt_s,
                                   double return_period);
Hyetograph make_stepped_hyetograph(std::vector<double> intensities_mm_per_h, double dt_s,
                                   double return_period);

/// Parses the storm config: a JSON array (or {"storms": [...]}) of
/// {return_period_years, duration_s, dt_s, profile, depth_mm | intensities_mm_per_h}.
std::vector<Hyetograph> parse_storm_config(const nlohmann::json& doc);
std::vector<Hyetograph> load_storm_config(const std::filesystem::path& path);
nlohmann::json storm_to_json(const Hyetograph& h);

struct CaptureSpec {
  int tile_id = 0;
  double fraction = 1.0;
};

/// Roof rain routing: for every building footprint cell, the active cell
/// that receives its rain.
struct RainRedirection {
  std::vector<std::size_t> source;
  std::vector<std::size_t> target;

  std::size_t size() const noexcept { return source.size(); }
};

/// Nearest active cell by Euclidean centre distance; ties go to the lowest
/// row-major index. Throws DomainError when the grid has no active cell.
RainRedirection build_redirection(std::span<const geo::BuildingFootprint> buildings,
                                  const TerrainGrid& grid);

/// Per-cell multiplier on the storm intensity after captures and roof-rain
/// redirection: an active cell receives (1 - f) of its own rain plus
/// (1 - f_b) for every roof cell b routed to it, where f is the capture
/// fraction of the tile the rain originates in.
std::vector<double> rain_weights(const TerrainGrid& grid, std::span<const CaptureSpec> captures,
                                 const RainRedirection& redirection,
                                 const geo::TilePartition& partition);

/// Per-cell source rate in m/s at time t.
std::vector<double> rain_rate(const Hyetograph& h, std::span<const CaptureSpec> captures,
                              const RainRedirection& redirection,
                              const geo::TilePartition& partition, const TerrainGrid& grid,
                              double t);

constexpr double mm_per_hour_to_m_per_s(double v) noexcept { return v / 3.6e6; }

}  // namespace floodplan::storm
