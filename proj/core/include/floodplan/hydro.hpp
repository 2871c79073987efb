#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "floodplan/geodata.hpp"
#include "floodplan/grid.hpp"
#include "floodplan/storm.hpp"

namespace floodplan::hydro {

/// Surface parameters of one land class. Infiltration is a constant rate
/// drawing down a finite per-cell storage.
struct SurfaceClass {
  double manning = 0.02;               // s m^-1/3
  double infiltration_mm_per_h = 0.0;  // mm/h
  double capacity_mm = 0.0;            // mm
};

/// Stand-in parameter set; none of these values come from observations.
struct SurfaceParams {
  SurfaceClass green{0.035, 12.5, 50.0};
  SurfaceClass paved{0.02, 0.0, 0.0};
  SurfaceClass pond{0.035, 12.5, 50.0};
  /// Applied by permeable-pavement interventions.
  SurfaceClass pavement{0.02, 200.0, 150.0};

  const SurfaceClass& of(geo::LandClass c) const noexcept;
};

struct SurfaceProperties {
  std::vector<double> manning;                // s m^-1/3
  std::vector<double> infiltration_rate;      // m/s
  std::vector<double> infiltration_capacity;  // m (initial storage)
  std::vector<std::uint8_t> pond;             // storage-depression cells

  void validate(const TerrainGrid& grid) const;
};

SurfaceProperties make_surface_properties(const geo::LandUseMap& landuse,
                                          const SurfaceParams& params);

/// Which domain edges are transmissive (free outfall). Edges that are not
/// open, and every face shared with an inactive cell, are reflective walls.
struct OpenBoundaries {
  bool north = true;
  bool south = true;
  bool east = true;
  bool west = true;
};

struct SolverSettings {
  double cfl = 0.5;
  double dry_threshold = 1e-6;  // m
  double dt_max = 5.0;          // s, used while the domain is dry
  double gravity = 9.81;
  double drain_down = 3600.0;   // s simulated after the storm ends
  double conservation_tolerance = 1e-6;
  std::size_t max_steps = 20'000'000;
  unsigned threads = 1;
  OpenBoundaries open;
};

struct FlowState {
  std::vector<double> h;                    // m
  std::vector<double> qx;                   // m^2/s, +x east
  std::vector<double> qy;                   // m^2/s, +y north
  std::vector<double> infiltration_left;    // m of remaining storage
  double t = 0.0;                           // s

  double volume(const GridGeometry& geo) const;
};

FlowState dry_state(const TerrainGrid& grid, const SurfaceProperties& props);

/// Volumes exchanged during one step (m^3).
struct StepVolumes {
  double rain = 0.0;
  double infiltrated = 0.0;
  double outflow = 0.0;
  double positivity_fix = 0.0;
};

/// First-order Godunov finite-volume solver for the 2D shallow-water
/// equations: hydrostatic reconstruction for the bed slope, HLL fluxes for
/// mass and normal momentum, upwinded tangential momentum, semi-implicit
/// Manning friction, then rain and infiltration as cell sources.
///
/// The solver owns its scratch buffers and optional worker team; it is not
/// itself thread-safe but separate instances may run concurrently over the
/// same (read-only) grid and properties. Results are bit-identical for any
/// thread count: each cell's update is independent and volume reductions are
/// summed per row and then combined in row order.
class Solver {
 public:
  Solver(const TerrainGrid& grid, const SurfaceProperties& props, SolverSettings settings);
  ~Solver();
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  /// Largest stable step under the CFL condition; `settings.dt_max` when dry.
  double cfl_dt(const FlowState& state) const;

  /// Advances `state` by dt with a per-cell source of `rain_weight[i] * rate`
  /// (m/s). An empty weight span means no rain. `max_depth`, when non-empty,
  /// is raised pointwise to the new depths.
  StepVolumes advance(FlowState& state, std::span<const double> rain_weight, double rate,
                      double dt, std::span<double> max_depth = {});

  const SolverSettings& settings() const noexcept { return settings_; }

 private:
  struct Team;

  void compute_faces(const FlowState& s, std::size_t row_begin, std::size_t row_end);
  void update_cells(FlowState& s, std::span<const double> rain_weight, double rate, double dt,
                    std::span<double> max_depth, std::size_t row_begin, std::size_t row_end);
  void for_rows(const std::function<void(std::size_t, std::size_t)>& fn);

  const TerrainGrid& grid_;
  const SurfaceProperties& props_;
  SolverSettings settings_;
  std::size_t rows_, cols_;
  // x-faces: rows_ x (cols_ + 1); y-faces: (rows_ + 1) x cols_.
  std::vector<double> fx_mass_, fx_mom_l_, fx_mom_r_, fx_tan_;
  std::vector<double> fy_mass_, fy_mom_l_, fy_mom_r_, fy_tan_;
  std::vector<double> row_rain_, row_infil_, row_out_, row_fix_;
  mutable std::vector<double> row_speed_;
  std::unique_ptr<Team> team_;
  double step_time_ = 0.0;
};

/// Convenience wrappers mirroring the solver's operations as pure functions.
FlowState step(const FlowState& state, const SurfaceProperties& props, const TerrainGrid& grid,
               std::span<const double> rain_m_per_s, double dt,
               const SolverSettings& settings = {});
double cfl_dt(const FlowState& state, const TerrainGrid& grid, double courant,
              const SolverSettings& settings = {});

struct MaxDepthRaster {
  GridGeometry geo;
  std::vector<double> depth;
  std::string scenario_id;
  double end_time = 0.0;
};

struct VolumeLedger {
  double rain_in = 0.0;
  double infiltrated = 0.0;
  double boundary_outflow = 0.0;
  double stored = 0.0;
  double pond_stored = 0.0;
  double initial_stored = 0.0;
  double positivity_fix = 0.0;

  double imbalance() const noexcept;
  double relative_error() const noexcept;
};

struct StormScenario {
  std::string id;
  storm::Hyetograph storm;
  /// Per-cell multiplier on the storm intensity (see storm::rain_weights).
  std::vector<double> rain_weight;
  /// Simulation end time; 0 means storm duration + settings.drain_down.
  double sim_end = 0.0;
};

struct RunResult {
  MaxDepthRaster max_depth;
  VolumeLedger ledger;
  std::size_t steps = 0;
  FlowState final_state;
};

using ProgressFn = std::function<void(double fraction)>;

/// Runs one storm from a dry start. Throws SolverDivergence on non-finite
/// values and ConservationError when the ledger does not close.
RunResult run_scenario(const StormScenario& scenario, const TerrainGrid& grid,
                       const SurfaceProperties& props, const SolverSettings& settings,
                       const ProgressFn& progress = {});

}  // namespace floodplan::hydro
