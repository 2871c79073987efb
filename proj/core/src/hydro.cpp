#include "floodplan/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <thread>

#include "floodplan/error.hpp"

namespace floodplan::hydro {

const SurfaceClass& SurfaceParams::of(geo::LandClass c) const noexcept {
  switch (c) {
    case geo::LandClass::green: return green;
    case geo::LandClass::pond: return pond;
    case geo::LandClass::paved:
    case geo::LandClass::building: break;
  }
  return paved;
}

void SurfaceProperties::validate(const TerrainGrid& grid) const {
  const std::size_t n = grid.geo.cell_count();
  if (manning.size() != n || infiltration_rate.size() != n ||
      infiltration_capacity.size() != n || pond.size() != n)
    throw DomainError("surface properties do not match the grid");
  for (std::size_t i = 0; i < n; ++i) {
    if (!grid.active[i]) continue;
    // n = 0 is a frictionless surface.
    if (!(manning[i] >= 0.0)) throw DomainError("Manning n must be non-negative on active cells");
    if (!(infiltration_rate[i] >= 0.0) || !(infiltration_capacity[i] >= 0.0))
      throw DomainError("infiltration parameters must be non-negative");
  }
}

SurfaceProperties make_surface_properties(const geo::LandUseMap& landuse,
                                          const SurfaceParams& params) {
  SurfaceProperties p;
  const std::size_t n = landuse.cells.size();
  p.manning.resize(n);
  p.infiltration_rate.resize(n);
  p.infiltration_capacity.resize(n);
  p.pond.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const SurfaceClass& s = params.of(landuse.cells[i]);
    p.manning[i] = s.manning;
    p.infiltration_rate[i] = storm::mm_per_hour_to_m_per_s(s.infiltration_mm_per_h);
    p.infiltration_capacity[i] = s.capacity_mm / 1000.0;
    p.pond[i] = landuse.cells[i] == geo::LandClass::pond ? 1 : 0;
  }
  return p;
}

double FlowState::volume(const GridGeometry& geo) const {
  double sum = 0.0;
  for (double v : h) sum += v;
  return sum * geo.cell_area();
}

FlowState dry_state(const TerrainGrid& grid, const SurfaceProperties& props) {
  const std::size_t n = grid.geo.cell_count();
  FlowState s;
  s.h.assign(n, 0.0);
  s.qx.assign(n, 0.0);
  s.qy.assign(n, 0.0);
  s.infiltration_left = props.infiltration_capacity;
  return s;
}

namespace {

struct Flux {
  double mass;
  double mom;  // normal momentum
  double tan;  // tangential momentum
};

/// HLL flux across a face with normal pointing from the left to the right
/// state. `u` is the normal velocity, `v` the tangential one.
inline Flux hll(double hl, double ul, double vl, double hr, double ur, double vr, double g,
                double eps) noexcept {
  if (hl <= eps && hr <= eps) return {0.0, 0.0, 0.0};
  const double ql = hl * ul, qr = hr * ur;
  const double fl_mom = ql * ul + 0.5 * g * hl * hl;
  const double fr_mom = qr * ur + 0.5 * g * hr * hr;
  if (hl == hr && ul == ur && vl == vr) return {ql, fl_mom, ql * vl};

  const double cl = std::sqrt(g * hl), cr = std::sqrt(g * hr);
  double sl, sr;
  if (hl <= eps) {
    sl = ur - 2.0 * cr;
    sr = ur + cr;
  } else if (hr <= eps) {
    sl = ul - cl;
    sr = ul + 2.0 * cl;
  } else {
    const double u_star = 0.5 * (ul + ur) + cl - cr;
    const double c_star = 0.5 * (cl + cr) + 0.25 * (ul - ur);
    sl = std::min(ul - cl, u_star - c_star);
    sr = std::max(ur + cr, u_star + c_star);
  }

  double mass, mom;
  if (sl >= 0.0) {
    mass = ql;
    mom = fl_mom;
  } else if (sr <= 0.0) {
    mass = qr;
    mom = fr_mom;
  } else {
    const double inv = 1.0 / (sr - sl);
    mass = (sr * ql - sl * qr + sl * sr * (hr - hl)) * inv;
    mom = (sr * fl_mom - sl * fr_mom + sl * sr * (qr - ql)) * inv;
  }
  const double tan = mass > 0.0 ? mass * vl : mass * vr;
  return {mass, mom, tan};
}

}  // namespace

// Persistent worker team: `run` splits the row range into one contiguous
// chunk per thread and blocks until every chunk has finished.
struct Solver::Team {
  explicit Team(unsigned n) {
    for (unsigned i = 1; i < n; ++i) workers.emplace_back([this, i] { loop(i); });
    size = n;
  }
  ~Team() {
    {
      std::lock_guard lock(mu);
      stop = true;
      ++generation;
    }
    cv.notify_all();
    for (auto& t : workers) t.join();
  }

  void run(std::size_t rows, const std::function<void(std::size_t, std::size_t)>& fn) {
    {
      std::lock_guard lock(mu);
      job = &fn;
      total = rows;
      pending = size - 1;
      ++generation;
    }
    cv.notify_all();
    chunk(0, fn);
    std::unique_lock lock(mu);
    done_cv.wait(lock, [this] { return pending == 0; });
    job = nullptr;
  }

  void chunk(unsigned k, const std::function<void(std::size_t, std::size_t)>& fn) {
    const std::size_t begin = total * k / size, end = total * (k + 1) / size;
    if (begin < end) fn(begin, end);
  }

  void loop(unsigned k) {
    std::uint64_t seen = 0;
    while (true) {
      const std::function<void(std::size_t, std::size_t)>* fn = nullptr;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return generation != seen; });
        seen = generation;
        if (stop) return;
        fn = job;
      }
      chunk(k, *fn);
      {
        std::lock_guard lock(mu);
        --pending;
      }
      done_cv.notify_one();
    }
  }

  std::vector<std::thread> workers;
  unsigned size = 1;
  std::mutex mu;
  std::condition_variable cv, done_cv;
  std::uint64_t generation = 0;
  unsigned pending = 0;
  std::size_t total = 0;
  bool stop = false;
  const std::function<void(std::size_t, std::size_t)>* job = nullptr;
};

Solver::Solver(const TerrainGrid& grid, const SurfaceProperties& props, SolverSettings settings)
    : grid_(grid),
      props_(props),
      settings_(settings),
      rows_(grid.geo.n_rows),
      cols_(grid.geo.n_cols) {
  grid.validate();
  props.validate(grid);
  if (!(settings_.cfl > 0.0 && settings_.cfl <= 1.0))
    throw ConfigError("CFL number must lie in (0, 1]");
  const std::size_t nfx = rows_ * (cols_ + 1), nfy = (rows_ + 1) * cols_;
  for (auto* v : {&fx_mass_, &fx_mom_l_, &fx_mom_r_, &fx_tan_}) v->assign(nfx, 0.0);
  for (auto* v : {&fy_mass_, &fy_mom_l_, &fy_mom_r_, &fy_tan_}) v->assign(nfy, 0.0);
  for (auto* v : {&row_rain_, &row_infil_, &row_out_, &row_fix_, &row_speed_}) v->assign(rows_, 0.0);
  const unsigned threads = std::max(1u, std::min<unsigned>(settings_.threads,
                                                          static_cast<unsigned>(rows_)));
  if (threads > 1) team_ = std::make_unique<Team>(threads);
}

Solver::~Solver() = default;

void Solver::for_rows(const std::function<void(std::size_t, std::size_t)>& fn) {
  if (team_)
    team_->run(rows_, fn);
  else
    fn(0, rows_);
}

double Solver::cfl_dt(const FlowState& s) const {
  const double g = settings_.gravity, eps = settings_.dry_threshold;
  auto scan = [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      double smax = 0.0;
      const std::size_t base = r * cols_;
      for (std::size_t c = 0; c < cols_; ++c) {
        const std::size_t i = base + c;
        const double h = s.h[i];
        if (h <= eps || !grid_.active[i]) continue;
        const double a = std::sqrt(g * h);
        const double u = std::abs(s.qx[i] / h), v = std::abs(s.qy[i] / h);
        smax = std::max(smax, std::max(u, v) + a);
      }
      row_speed_[r] = smax;
    }
  };
  if (team_)
    team_->run(rows_, scan);
  else
    scan(0, rows_);
  double smax = 0.0;
  for (double v : row_speed_) smax = std::max(smax, v);
  if (smax <= 0.0) return settings_.dt_max;
  return std::min(settings_.dt_max, settings_.cfl * grid_.geo.cell_size / smax);
}

void Solver::compute_faces(const FlowState& s, std::size_t row_begin, std::size_t row_end) {
  const double g = settings_.gravity, eps = settings_.dry_threshold;
  const auto& z = grid_.elevation;
  const auto& act = grid_.active;
  const auto& h = s.h;
  const auto& qx = s.qx;
  const auto& qy = s.qy;
  const OpenBoundaries& open = settings_.open;

  auto vel = [&](std::size_t i, double& u, double& v) {
    if (h[i] > eps) {
      u = qx[i] / h[i];
      v = qy[i] / h[i];
    } else {
      u = v = 0.0;
    }
  };

  // Interior face between a left (lower coordinate along the normal) cell
  // and a right cell; `normal_x` selects which discharge is normal.
  auto interior = [&](std::size_t li, std::size_t ri, bool normal_x, double& mass, double& mom_l,
                      double& mom_r, double& tan) {
    const bool al = act[li], ar = act[ri];
    mass = mom_l = mom_r = tan = 0.0;
    if (!al && !ar) return;
    double ul, vl, ur, vr;
    if (al && ar) {
      const double hL = h[li], hR = h[ri];
      if (hL <= eps && hR <= eps) return;
      const double zf = std::max(z[li], z[ri]);
      const double hl = std::max(0.0, hL + z[li] - zf);
      const double hr = std::max(0.0, hR + z[ri] - zf);
      vel(li, ul, vl);
      vel(ri, ur, vr);
      if (!normal_x) std::swap(ul, vl), std::swap(ur, vr);
      const Flux f = hll(hl, ul, vl, hr, ur, vr, g, eps);
      mass = f.mass;
      tan = f.tan;
      mom_l = f.mom + 0.5 * g * (hL * hL - hl * hl);
      mom_r = f.mom + 0.5 * g * (hR * hR - hr * hr);
    } else if (al) {
      const double hL = h[li];
      if (hL <= eps) {
        mom_l = 0.5 * g * hL * hL;
        return;
      }
      vel(li, ul, vl);
      if (!normal_x) std::swap(ul, vl);
      mom_l = hll(hL, ul, vl, hL, -ul, vl, g, eps).mom;
    } else {
      const double hR = h[ri];
      if (hR <= eps) {
        mom_r = 0.5 * g * hR * hR;
        return;
      }
      vel(ri, ur, vr);
      if (!normal_x) std::swap(ur, vr);
      mom_r = hll(hR, -ur, vr, hR, ur, vr, g, eps).mom;
    }
  };

  // Domain-edge face of cell i. `outward_sign` is +1 when the outward normal
  // points along +x/+y. Free outfall when open and the flow leaves the
  // domain, reflective wall otherwise.
  auto edge = [&](std::size_t i, bool normal_x, double outward_sign, bool is_open, double& mass,
                  double& mom, double& tan) {
    mass = mom = tan = 0.0;
    if (!act[i]) return;
    const double hc = h[i];
    if (hc <= eps) {
      mom = 0.5 * g * hc * hc;
      return;
    }
    double un, ut;
    vel(i, un, ut);
    if (!normal_x) std::swap(un, ut);
    if (is_open && un * outward_sign >= 0.0) {
      mass = hc * un;
      mom = mass * un + 0.5 * g * hc * hc;
      tan = mass * ut;
    } else {
      mom = outward_sign > 0 ? hll(hc, un, ut, hc, -un, ut, g, eps).mom
                             : hll(hc, -un, ut, hc, un, ut, g, eps).mom;
    }
  };

  const std::size_t fx_stride = cols_ + 1;
  for (std::size_t r = row_begin; r < row_end; ++r) {
    // x-faces of row r.
    const std::size_t base = r * cols_;
    const std::size_t fbase = r * fx_stride;
    edge(base, true, -1.0, open.west, fx_mass_[fbase], fx_mom_r_[fbase], fx_tan_[fbase]);
    fx_mom_l_[fbase] = 0.0;
    for (std::size_t c = 1; c < cols_; ++c)
      interior(base + c - 1, base + c, true, fx_mass_[fbase + c], fx_mom_l_[fbase + c],
               fx_mom_r_[fbase + c], fx_tan_[fbase + c]);
    edge(base + cols_ - 1, true, 1.0, open.east, fx_mass_[fbase + cols_], fx_mom_l_[fbase + cols_],
         fx_tan_[fbase + cols_]);
    fx_mom_r_[fbase + cols_] = 0.0;

    // y-face row r: between cell row r-1 (north, right side) and r (south,
    // left side); row 0 is the north edge.
    const std::size_t ybase = r * cols_;
    if (r == 0) {
      for (std::size_t c = 0; c < cols_; ++c) {
        edge(c, false, 1.0, open.north, fy_mass_[c], fy_mom_l_[c], fy_tan_[c]);
        fy_mom_r_[c] = 0.0;
      }
    } else {
      for (std::size_t c = 0; c < cols_; ++c)
        interior(base + c, base - cols_ + c, false, fy_mass_[ybase + c], fy_mom_l_[ybase + c],
                 fy_mom_r_[ybase + c], fy_tan_[ybase + c]);
    }
    if (r + 1 == rows_) {
      const std::size_t sb = rows_ * cols_;
      for (std::size_t c = 0; c < cols_; ++c) {
        edge(base + c, false, -1.0, open.south, fy_mass_[sb + c], fy_mom_r_[sb + c],
             fy_tan_[sb + c]);
        fy_mom_l_[sb + c] = 0.0;
      }
    }
  }
}

void Solver::update_cells(FlowState& s, std::span<const double> rain_weight, double rate,
                          double dt, std::span<double> max_depth, std::size_t row_begin,
                          std::size_t row_end) {
  const double g = settings_.gravity, eps = settings_.dry_threshold;
  const double k = dt / grid_.geo.cell_size;
  const std::size_t fx_stride = cols_ + 1;
  const bool raining = !rain_weight.empty() && rate > 0.0;
  const double rain_depth = rate * dt;

  for (std::size_t r = row_begin; r < row_end; ++r) {
    double rain_sum = 0.0, infil_sum = 0.0, fix_sum = 0.0;
    const std::size_t base = r * cols_;
    for (std::size_t c = 0; c < cols_; ++c) {
      const std::size_t i = base + c;
      if (!grid_.active[i]) continue;
      const std::size_t fw = r * fx_stride + c, fe = fw + 1;
      const std::size_t fn = r * cols_ + c, fs = fn + cols_;

      double h = s.h[i] - k * ((fx_mass_[fe] - fx_mass_[fw]) + (fy_mass_[fn] - fy_mass_[fs]));
      double qx = s.qx[i] - k * ((fx_mom_l_[fe] - fx_mom_r_[fw]) + (fy_tan_[fn] - fy_tan_[fs]));
      double qy = s.qy[i] - k * ((fy_mom_l_[fn] - fy_mom_r_[fs]) + (fx_tan_[fe] - fx_tan_[fw]));

      if (!std::isfinite(h) || !std::isfinite(qx) || !std::isfinite(qy))
        throw SolverDivergence(i, step_time_);
      if (h < 0.0) {
        fix_sum -= h;
        h = 0.0;
      }

      if (h > eps) {
        const double n = props_.manning[i];
        const double qmag = std::sqrt(qx * qx + qy * qy);
        const double h73 = h * h * std::cbrt(h);
        const double denom = 1.0 + dt * g * n * n * qmag / h73;
        qx /= denom;
        qy /= denom;
      }

      if (raining) {
        const double add = rain_weight[i] * rain_depth;
        h += add;
        rain_sum += add;
      }
      const double rate_i = props_.infiltration_rate[i];
      if (rate_i > 0.0 && h > 0.0) {
        const double inf = std::min({rate_i * dt, h, s.infiltration_left[i]});
        if (inf > 0.0) {
          h -= inf;
          s.infiltration_left[i] -= inf;
          infil_sum += inf;
        }
      }
      if (h <= eps) qx = qy = 0.0;

      s.h[i] = h;
      s.qx[i] = qx;
      s.qy[i] = qy;
      if (!max_depth.empty() && h > max_depth[i]) max_depth[i] = h;
    }

    double out = 0.0;
    if (r == 0)
      for (std::size_t c = 0; c < cols_; ++c) out += fy_mass_[c];
    if (r + 1 == rows_)
      for (std::size_t c = 0; c < cols_; ++c) out -= fy_mass_[rows_ * cols_ + c];
    out += fx_mass_[r * fx_stride + cols_] - fx_mass_[r * fx_stride];

    row_rain_[r] = rain_sum;
    row_infil_[r] = infil_sum;
    row_fix_[r] = fix_sum;
    row_out_[r] = out * dt * grid_.geo.cell_size;
  }
}

StepVolumes Solver::advance(FlowState& state, std::span<const double> rain_weight, double rate,
                            double dt, std::span<double> max_depth) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  step_time_ = state.t;
  for_rows([&](std::size_t b, std::size_t e) { compute_faces(state, b, e); });
  for_rows([&](std::size_t b, std::size_t e) {
    update_cells(state, rain_weight, rate, dt, max_depth, b, e);
  });
  state.t += dt;

  StepVolumes v;
  const double area = grid_.geo.cell_area();
  for (std::size_t r = 0; r < rows_; ++r) {
    v.rain += row_rain_[r];
    v.infiltrated += row_infil_[r];
    v.outflow += row_out_[r];
    v.positivity_fix += row_fix_[r];
  }
  v.rain *= area;
  v.infiltrated *= area;
  v.positivity_fix *= area;
  return v;
}

FlowState step(const FlowState& state, const SurfaceProperties& props, const TerrainGrid& grid,
               std::span<const double> rain_m_per_s, double dt, const SolverSettings& settings) {
  Solver solver(grid, props, settings);
  FlowState next = state;
  solver.advance(next, rain_m_per_s, 1.0, dt);
  return next;
}

double cfl_dt(const FlowState& state, const TerrainGrid& grid, double courant,
              const SolverSettings& settings) {
  SolverSettings s = settings;
  s.cfl = courant;
  s.threads = 1;
  // Properties are irrelevant to the wave-speed scan.
  SurfaceProperties props;
  const std::size_t n = grid.geo.cell_count();
  props.manning.assign(n, 0.03);
  props.infiltration_rate.assign(n, 0.0);
  props.infiltration_capacity.assign(n, 0.0);
  props.pond.assign(n, 0);
  Solver solver(grid, props, s);
  return solver.cfl_dt(state);
}

double VolumeLedger::imbalance() const noexcept {
  return (rain_in + initial_stored + positivity_fix) - (infiltrated + boundary_outflow + stored);
}

double VolumeLedger::relative_error() const noexcept {
  const double scale = std::max({rain_in + initial_stored, stored, 1e-12});
  return std::abs(imbalance()) / scale;
}

RunResult run_scenario(const StormScenario& scenario, const TerrainGrid& grid,
                       const SurfaceProperties& props, const SolverSettings& settings,
                       const ProgressFn& progress) {
  scenario.storm.validate();
  if (!scenario.rain_weight.empty() && scenario.rain_weight.size() != grid.geo.cell_count())
    throw DomainError("rain weights do not match the grid");
  const double end = scenario.sim_end > 0.0 ? scenario.sim_end
                                            : scenario.storm.duration + settings.drain_down;
  if (end < scenario.storm.duration)
    throw ConfigError("simulation must end at or after the storm ends");

  Solver solver(grid, props, settings);
  RunResult result;
  FlowState state = dry_state(grid, props);
  result.max_depth.geo = grid.geo;
  result.max_depth.depth.assign(grid.geo.cell_count(), 0.0);
  result.max_depth.scenario_id = scenario.id;

  VolumeLedger& ledger = result.ledger;
  ledger.initial_stored = 0.0;
  const double min_dt = 1e-9;
  std::size_t next_report = 1;
  while (state.t < end - min_dt) {
    double dt = solver.cfl_dt(state);
    const double change = scenario.storm.next_change(state.t);
    if (change > state.t + min_dt) dt = std::min(dt, change - state.t);
    dt = std::min(dt, end - state.t);
    const double rate =
        storm::mm_per_hour_to_m_per_s(scenario.storm.intensity_at(state.t + 0.5 * dt));
    const StepVolumes v = solver.advance(state, scenario.rain_weight, rate, dt, result.max_depth.depth);
    ledger.rain_in += v.rain;
    ledger.infiltrated += v.infiltrated;
    ledger.boundary_outflow += v.outflow;
    ledger.positivity_fix += v.positivity_fix;
    if (++result.steps > settings.max_steps)
      throw SolverDivergence(0, state.t);
    if (progress && result.steps >= next_report) {
      progress(std::min(1.0, state.t / end));
      next_report = result.steps + 200;
    }
  }

  const double area = grid.geo.cell_area();
  double stored = 0.0, pond = 0.0;
  for (std::size_t i = 0; i < state.h.size(); ++i) {
    stored += state.h[i];
    if (props.pond[i]) pond += state.h[i];
  }
  ledger.stored = stored * area;
  ledger.pond_stored = pond * area;
  result.max_depth.end_time = state.t;
  if (ledger.relative_error() > settings.conservation_tolerance)
    throw ConservationError("volume ledger for '" + scenario.id + "' does not close: relative error " +
                            std::to_string(ledger.relative_error()));
  result.final_state = std::move(state);
  if (progress) progress(1.0);
  return result;
}

}  // namespace floodplan::hydro
