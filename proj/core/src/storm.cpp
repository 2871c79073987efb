#include "floodplan/storm.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "floodplan/error.hpp"

namespace floodplan::storm {

double Hyetograph::total_depth() const noexcept {
  double sum = 0.0;
  for (double i : intensity) sum += i * dt / 3600.0;
  return sum;
}

double Hyetograph::intensity_at(double t) const noexcept {
  if (t < 0.0 || t >= duration || intensity.empty()) return 0.0;
  auto k = static_cast<std::size_t>(t / dt);
  if (k >= intensity.size()) k = intensity.size() - 1;
  return intensity[k];
}

double Hyetograph::next_change(double t) const noexcept {
  if (t >= duration) return std::numeric_limits<double>::infinity();
  if (t < 0.0) return 0.0;
  const double k = std::floor(t / dt);
  double edge = (k + 1.0) * dt;
  if (edge <= t) edge += dt;
  return std::min(edge, duration);
}

void Hyetograph::validate() const {
  if (!(duration > 0.0)) throw ConfigError("storm duration must be positive");
  if (!(dt > 0.0)) throw ConfigError("storm dt must be positive");
  const double steps = duration / dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
    throw ConfigError("storm dt must divide the duration");
  if (intensity.size() != static_cast<std::size_t>(std::llround(steps)))
    throw ConfigError("storm has " + std::to_string(intensity.size()) +
                      " intensities but duration/dt = " + std::to_string(std::llround(steps)));
  for (double v : intensity)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ConfigError("storm intensities must be finite and non-negative");
}

Hyetograph make_uniform_hyetograph(double depth_mm, double duration_s, double dt_s,
                                   double return_period) {
  if (!(depth_mm >= 0.0)) throw ConfigError("storm depth must be non-negative");
  if (!(duration_s > 0.0) || !(dt_s > 0.0))
    throw ConfigError("storm duration and dt must be positive");
  const double steps = duration_s / dt_s;
  if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
    throw ConfigError("storm dt (" + std::to_string(dt_s) + " s) must divide the duration (" +
                      std::to_string(duration_s) + " s)");
  Hyetograph h;
  h.return_period = return_period;
  h.duration = duration_s;
  h.dt = dt_s;
  h.intensity.assign(static_cast<std::size_t>(std::llround(steps)),
                     depth_mm / (duration_s / 3600.0));
  return h;
}

Hyetograph make_stepped_hyetograph(std::vector<double> intensities_mm_per_h, double dt_s,
                                   double return_period) {
  Hyetograph h;
  h.return_period = return_period;
  h.dt = dt_s;
  h.duration = dt_s * static_cast<double>(intensities_mm_per_h.size());
  h.intensity = std::move(intensities_mm_per_h);
  h.validate();
  return h;
}

std::vector<Hyetograph> parse_storm_config(const nlohmann::json& doc) {
  const nlohmann::json& list = doc.is_object() ? doc.at("storms") : doc;
  if (!list.is_array()) throw ConfigError("storm config must be a list of storms");
  std::vector<Hyetograph> out;
  for (const auto& s : list) {
    const double rp = s.at("return_period_years").get<double>();
    const double dt = s.at("dt_s").get<double>();
    const std::string profile = s.value("profile", "uniform");
    Hyetograph h;
    if (profile == "uniform") {
      h = make_uniform_hyetograph(s.at("depth_mm").get<double>(), s.at("duration_s").get<double>(),
                                  dt, rp);
    } else if (profile == "stepped") {
      h = make_stepped_hyetograph(s.at("intensities_mm_per_h").get<std::vector<double>>(), dt, rp);
      if (s.contains("duration_s") &&
          std::abs(s["duration_s"].get<double>() - h.duration) > 1e-9 * h.duration)
        throw ConfigError("stepped storm duration_s disagrees with intensities * dt_s");
    } else {
      throw ConfigError("unknown storm profile '" + profile + "'");
    }
    for (const auto& prev : out)
      if (prev.return_period == rp)
        throw ConfigError("duplicate storm for return period " + std::to_string(rp));
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<Hyetograph> load_storm_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open storm config '" + path.string() + "'", path.string());
  try {
    return parse_storm_config(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what(), path.string());
  }
}

nlohmann::json storm_to_json(const Hyetograph& h) {
  return {{"return_period_years", h.return_period},
          {"duration_s", h.duration},
          {"dt_s", h.dt},
          {"profile", "stepped"},
          {"intensities_mm_per_h", h.intensity},
          {"total_depth_mm", h.total_depth()}};
}

RainRedirection build_redirection(std::span<const geo::BuildingFootprint> buildings,
                                  const TerrainGrid& grid) {
  const GridGeometry& geo = grid.geo;
  if (grid.active_count() == 0) throw DomainError("no active cell to receive roof rain");
  RainRedirection out;
  const auto rows = static_cast<std::ptrdiff_t>(geo.n_rows);
  const auto cols = static_cast<std::ptrdiff_t>(geo.n_cols);
  const std::ptrdiff_t max_ring = std::max(rows, cols);

  for (const auto& b : buildings) {
    for (std::size_t cell : b.footprint_cells) {
      const auto r = static_cast<std::ptrdiff_t>(geo.row_of(cell));
      const auto c = static_cast<std::ptrdiff_t>(geo.col_of(cell));
      std::ptrdiff_t best_d2 = std::numeric_limits<std::ptrdiff_t>::max();
      std::size_t best = 0;
      // Chebyshev ring k contains cells at Euclidean distance >= k, so once a
      // hit at squared distance d2 exists, rings with k*k > d2 cannot win.
      for (std::ptrdiff_t k = 1; k <= max_ring; ++k) {
        if (k * k > best_d2) break;
        for (std::ptrdiff_t dr = -k; dr <= k; ++dr) {
          const std::ptrdiff_t step = (dr == -k || dr == k) ? 1 : 2 * k;
          for (std::ptrdiff_t dc = -k; dc <= k; dc += step) {
            const auto rr = r + dr, cc = c + dc;
            if (rr < 0 || cc < 0 || rr >= rows || cc >= cols) continue;
            const std::size_t n = geo.index(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
            if (!grid.active[n]) continue;
            const std::ptrdiff_t d2 = dr * dr + dc * dc;
            if (d2 < best_d2 || (d2 == best_d2 && n < best)) {
              best_d2 = d2;
              best = n;
            }
          }
        }
      }
      out.source.push_back(cell);
      out.target.push_back(best);
    }
  }
  return out;
}

std::vector<double> rain_weights(const TerrainGrid& grid, std::span<const CaptureSpec> captures,
                                 const RainRedirection& redirection,
                                 const geo::TilePartition& partition) {
  std::vector<double> tile_keep(partition.tiles.size() + 1, 1.0);
  for (const auto& cap : captures) {
    if (!(cap.fraction >= 0.0 && cap.fraction <= 1.0))
      throw ConfigError("capture fraction must lie in [0, 1]");
    tile_keep[partition.index_of(cap.tile_id) + 1] = 1.0 - cap.fraction;
  }
  std::vector<double> w(grid.geo.cell_count(), 0.0);
  for (std::size_t cell = 0; cell < w.size(); ++cell)
    if (grid.active[cell])
      w[cell] = tile_keep[static_cast<std::size_t>(partition.cell_to_tile[cell])];
  for (std::size_t i = 0; i < redirection.size(); ++i) {
    const int origin_tile = partition.cell_to_tile[redirection.source[i]];
    w[redirection.target[i]] += tile_keep[static_cast<std::size_t>(origin_tile)];
  }
  return w;
}

std::vector<double> rain_rate(const Hyetograph& h, std::span<const CaptureSpec> captures,
                              const RainRedirection& redirection,
                              const geo::TilePartition& partition, const TerrainGrid& grid,
                              double t) {
  auto w = rain_weights(grid, captures, redirection, partition);
  const double rate = mm_per_hour_to_m_per_s(h.intensity_at(t));
  for (double& v : w) v *= rate;
  return w;
}

}  // namespace floodplan::storm
