// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Usage: floodplan_acceptance <work dir>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "floodplan/exposure.hpp"
#include "floodplan/geojson.hpp"
#include "floodplan/hydro.hpp"
#include "floodplan/planner.hpp"
#include "floodplan/project.hpp"
#include "floodplan/raster_io.hpp"
#include "floodplan/registry.hpp"
#include "floodplan/service.hpp"
#include "floodplan/storm.hpp"
#include "floodplan/synthetic.hpp"

namespace fs = std::filesystem;
using namespace floodplan;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

// Collects failed checks for one criterion.
struct Check {
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void that(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void note(const std::string& text) { notes.push_back(text); }
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

TerrainGrid flat(std::size_t rows, std::size_t cols, double cell, double z = 0.0) {
  TerrainGrid g;
  g.geo = {0.0, 0.0, cell, rows, cols};
  g.elevation.assign(rows * cols, z);
  g.active.assign(rows * cols, 1);
  return g;
}

hydro::SurfaceProperties props_for(std::size_t n, double manning) {
  hydro::SurfaceProperties p;
  p.manning.assign(n, manning);
  p.infiltration_rate.assign(n, 0.0);
  p.infiltration_capacity.assign(n, 0.0);
  p.pond.assign(n, 0);
  return p;
}

hydro::SolverSettings closed() {
  hydro::SolverSettings s;
  s.open = {false, false, false, false};
  return s;
}

// ---- 1 ---------------------------------------------------------------------

void conservation(Check& c) {
  const auto t0 = Clock::now();
  const auto grid = flat(100, 100, 2.0, 12.0);
  const auto props = props_for(grid.geo.cell_count(), 0.0);
  hydro::StormScenario sc;
  sc.id = "basin";
  sc.storm = storm::make_uniform_hyetograph(50.0, 3600.0, 3600.0, 10.0);
  sc.rain_weight.assign(grid.geo.cell_count(), 1.0);
  auto settings = closed();
  settings.drain_down = 0.0;
  const auto r = hydro::run_scenario(sc, grid, props, settings);
  const double elapsed = seconds_since(t0);

  double worst = 0.0;
  for (double h : r.final_state.h) worst = std::max(worst, std::abs(h - 0.05));
  c.that(r.ledger.relative_error() <= 1e-6, "ledger relative error " + fmt(r.ledger.relative_error()));
  c.that(worst <= 1e-6, "max |h - 0.05| = " + fmt(worst));
  c.that(elapsed < 30.0, "runtime " + fmt(elapsed) + " s");
  c.note("relative error " + fmt(r.ledger.relative_error()) + ", max |h - 0.05| " + fmt(worst) +
         ", " + fmt(elapsed) + " s");
}

// ---- 2 ---------------------------------------------------------------------

void well_balanced(Check& c) {
  double worst_all = 0.0;
  for (double top : {0.8, 1.3}) {
    auto grid = flat(40, 40, 2.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> z(0.0, top);
    for (auto& e : grid.elevation) e = z(rng);
    grid.active[grid.geo.index(10, 10)] = 0;
    const auto props = props_for(grid.geo.cell_count(), 0.03);
    hydro::Solver solver(grid, props, closed());
    auto s = hydro::dry_state(grid, props);
    for (std::size_t i = 0; i < s.h.size(); ++i)
      s.h[i] = grid.active[i] ? std::max(0.0, 1.0 - grid.elevation[i]) : 0.0;
    for (int k = 0; k < 1000; ++k) solver.advance(s, {}, 0.0, solver.cfl_dt(s));
    double worst = 0.0;
    for (std::size_t i = 0; i < s.h.size(); ++i)
      worst = std::max({worst, std::abs(s.qx[i]), std::abs(s.qy[i])});
    c.that(worst <= 1e-8, "max |q| " + fmt(worst) + " with bed top " + fmt(top));
    worst_all = std::max(worst_all, worst);
  }
  c.note("max |q| " + fmt(worst_all));
}

// ---- 3 ---------------------------------------------------------------------

void dam_break(Check& c) {
  const std::size_t n = 1000;
  const double hl = 1.0, x0 = 500.0, t_end = 10.0, g = 9.81;
  const auto grid = flat(1, n, 1.0);
  const auto props = props_for(n, 0.0);
  hydro::Solver solver(grid, props, closed());
  auto s = hydro::dry_state(grid, props);
  for (std::size_t i = 0; i < n; ++i) s.h[i] = grid.geo.center_x(i) < x0 ? hl : 0.0;
  while (s.t < t_end - 1e-12) solver.advance(s, {}, 0.0, std::min(solver.cfl_dt(s), t_end - s.t));

  const double c0 = std::sqrt(g * hl);
  double err = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = (grid.geo.center_x(i) - x0) / t_end;
    double exact = 0.0;
    if (xi <= -c0)
      exact = hl;
    else if (xi < 2.0 * c0)
      exact = (2.0 * c0 - xi) * (2.0 * c0 - xi) / (9.0 * g);
    err += std::abs(s.h[i] - exact);
    norm += exact;
  }
  const double l1 = err / norm;
  const double dam = 0.5 * (s.h[499] + s.h[500]);
  const double dam_rel = std::abs(dam - 4.0 / 9.0 * hl) / (4.0 / 9.0 * hl);
  c.that(l1 <= 0.05, "L1 error " + fmt(l1));
  c.that(dam_rel <= 0.03, "depth at dam " + fmt(dam));
  c.that(s.h.front() == hl && s.h.back() == 0.0, "waves reached the reach ends");
  c.note("L1 " + fmt(l1) + ", dam depth " + fmt(dam) + " (" + fmt(100 * dam_rel) + "% off)");
}

// ---- 4 ---------------------------------------------------------------------

void exposure_table(Check& c) {
  using exposure::ExposureClass;
  using exposure::classify;
  c.that(classify(0.05, 0.20) == ExposureClass::low, "row low");
  c.that(classify(0.05, 0.35) == ExposureClass::medium, "row medium (p90)");
  c.that(classify(0.15, 0.25) == ExposureClass::medium, "row medium (mean)");
  c.that(classify(0.12, 0.35) == ExposureClass::high, "row high");
  const double m = std::nextafter(0.10, 0.0), p = std::nextafter(0.30, 0.0);
  c.that(classify(m, p) == ExposureClass::low, "just below both thresholds");
  c.that(classify(0.10, p) == ExposureClass::medium, "mean at 0.10");
  c.that(classify(m, 0.30) == ExposureClass::medium, "p90 at 0.30");
  c.that(classify(0.10, 0.30) == ExposureClass::high, "both at thresholds");

  std::mt19937_64 rng(2024);
  std::exponential_distribution<double> depth(6.0);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> d(1 + rng() % 60);
    for (auto& v : d) v = (rng() % 4 == 0) ? 0.0 : depth(rng);
    double sum = 0.0;
    for (double v : d) sum += v;
    auto sorted = d;
    std::sort(sorted.begin(), sorted.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.9 * double(d.size()) - 1e-12));
    const auto got = exposure::buffer_stats(d);
    if (got.mean != sum / double(d.size()) || got.p90 != sorted[rank - 1]) ++mismatches;
  }
  c.that(mismatches == 0, std::to_string(mismatches) + " buffer-stat mismatches");
  c.note("4 rows, 4 boundary cases, 1000 random buffers");
}

// ---- 5 ---------------------------------------------------------------------

void ranking_arithmetic(Check& c) {
  damage::ScenarioDamages base, rc17;
  base.return_period = rc17.return_period = 10;
  base.total = 47.0e6;
  rc17.total = 35.3e6;
  const double b = planner::benefit(base, rc17);
  c.that(b == 11.7e6, "benefit " + fmt(b));

  const std::vector<planner::TileBenefit> tiles{{14, 47.0e6 - 42.3e6, 0.5070, {}},
                                                {13, 47.0e6 - 41.5e6, 0.6220, {}},
                                                {17, b, 0.2771, {}}};
  const auto r = planner::rank_tiles(tiles, 10.0);
  const bool order = r.rows.size() == 3 && r.rows[0].tile_id == 13 && r.rows[1].tile_id == 17 &&
                     r.rows[2].tile_id == 14;
  c.that(order, "ordering 13 > 17 > 14");
  if (!order) return;
  c.that(std::abs(r.rows[1].score - 3.24) <= 0.01, "rc_17 score " + fmt(r.rows[1].score));
  c.that(std::abs(r.rows[0].score - 3.38) <= 0.1, "rc_13 score " + fmt(r.rows[0].score));
  c.that(std::abs(r.rows[2].score - 2.37) <= 0.1, "rc_14 score " + fmt(r.rows[2].score));
  c.note("scores " + fmt(r.rows[0].score) + " / " + fmt(r.rows[1].score) + " / " + fmt(r.rows[2].score));
}

// ---- 6 ---------------------------------------------------------------------

void cost_arithmetic(Check& c) {
  const planner::CostModel rates;
  c.that(rates.pavement_install_per_m2 == 30.0 && rates.pavement_annual_per_m2 == 0.40 &&
             rates.pavement_life_years == 40.0,
         "pavement defaults");
  c.that(rates.pond_rate_per_m3() == 16.0 && rates.pond_annual_per_m2 == 0.60 && rates.pond_life_years == 15.0,
         "pond defaults");

  InterventionSpec pave;
  pave.type = InterventionType::permeable_pavement;
  pave.geometry = rectangle(0, 0, 64.0, 339.474609375);
  const auto pc = planner::cost_intervention(pave, rates);
  c.that(pc.area_m2 == 21726.375, "pavement area " + fmt(pc.area_m2));
  c.that(pc.installation == 651791.25, "pavement cost " + fmt(pc.installation));

  InterventionSpec pond;
  pond.type = InterventionType::detention_pond;
  pond.geometry = rectangle(0, 0, 100, 80);
  pond.pond_volume = 10'000.0;
  const auto po = planner::cost_intervention(pond, rates);
  c.that(po.installation == 160'000.0, "pond cost " + fmt(po.installation));

  planner::CostModel custom;
  custom.pavement_install_per_m2 = 45.0;
  custom.pond_install_gbp = 90'000.0;
  c.that(planner::cost_intervention(pave, custom).installation == 21726.375 * 45.0, "pavement override");
  c.that(planner::cost_intervention(pond, custom).installation == 180'000.0, "pond override");
  c.note("pavement " + fmt(pc.installation) + ", pond " + fmt(po.installation));
}

// ---- 7 and 8 ---------------------------------------------------------------

struct Execution {
  fs::path project;
  double seconds = 0.0;
  std::size_t stored_runs = 0;
};

std::size_t count_runs(const fs::path& registry) {
  const auto runs = registry / "runs";
  if (!fs::exists(runs)) return 0;
  return static_cast<std::size_t>(std::distance(fs::directory_iterator(runs), fs::directory_iterator{}));
}

int run_command(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// One capture-scan from an empty registry.
Execution scan(const fs::path& dir, unsigned workers) {
  fs::remove_all(dir);
  Execution e;
  e.project = synthetic::write_catchment_project(dir);
  const auto t0 = Clock::now();
#ifdef FLOODPLAN_CLI
  const std::string cmd = std::string(FLOODPLAN_CLI) + " capture-scan --project " + e.project.string() +
                          " --out " + (dir / "scan").string() + " --workers " + std::to_string(workers) +
                          " > " + (dir / "scan.log").string() + " 2>&1";
  if (run_command(cmd) != 0) throw std::runtime_error("capture-scan failed; see " + (dir / "scan.log").string());
#else
  const auto cfg = load_project(e.project);
  const auto study = build_study(cfg);
  RunRegistry reg(cfg.registry);
  planner::Planner p(study, reg);
  const auto tiles = planner::all_tile_ids(study.partition);
  const auto rps = study.return_periods();
  const auto m = p.run_matrix(rps, tiles, 1.0, workers);
  if (!m.failures.empty()) throw std::runtime_error("capture-scan had failed scenarios");
#endif
  e.seconds = seconds_since(t0);
  e.stored_runs = count_runs(dir / "registry");
  return e;
}

struct Loaded {
  ProjectConfig config;
  planner::Study study;
  std::unique_ptr<RunRegistry> registry;
  std::unique_ptr<planner::Planner> planner;

  explicit Loaded(const fs::path& project)
      : config(load_project(project)), study(build_study(config)) {
    registry = std::make_unique<RunRegistry>(config.registry);
    planner = std::make_unique<planner::Planner>(study, *registry);
  }

  planner::ScenarioResult get(const planner::ScenarioKey& key) const {
    auto r = planner->lookup(key);
    if (!r) throw std::runtime_error("missing stored run " + key.to_string());
    return std::move(*r);
  }

  std::vector<planner::ScenarioKey> matrix_keys() const {
    std::vector<planner::ScenarioKey> keys;
    for (double rp : study.return_periods()) {
      keys.push_back(planner::baseline_key(rp));
      for (const auto& t : study.partition.tiles) keys.push_back(planner::capture_key(t.id, 1.0, rp));
    }
    return keys;
  }

  planner::MatrixResult matrix() const {
    planner::MatrixResult m;
    for (const auto& key : matrix_keys()) {
      const auto r = get(key);
      m.damages[key] = r.damages;
      m.ledgers[key] = r.ledger;
    }
    return m;
  }
};

bool same_ledger(const hydro::VolumeLedger& a, const hydro::VolumeLedger& b) {
  return a.rain_in == b.rain_in && a.infiltrated == b.infiltrated && a.boundary_outflow == b.boundary_outflow &&
         a.stored == b.stored && a.pond_stored == b.pond_stored && a.positivity_fix == b.positivity_fix;
}

void scenario_matrix(Check& c, const fs::path& work) {
  const auto a = scan(work / "matrix_a", 1);
  const auto b = scan(work / "matrix_b", 2);
  Loaded la(a.project), lb(b.project);

  c.that(la.study.partition.tiles.size() == 9, std::to_string(la.study.partition.tiles.size()) + " tiles");
  c.that(la.study.storms.size() == 4, std::to_string(la.study.storms.size()) + " storms");
  c.that(a.stored_runs == 40, "execution A stored " + std::to_string(a.stored_runs) + " runs");
  c.that(b.stored_runs == 40, "execution B stored " + std::to_string(b.stored_runs) + " runs");
  c.that(a.seconds < 600.0, "execution A took " + fmt(a.seconds) + " s");
  c.that(b.seconds < 600.0, "execution B took " + fmt(b.seconds) + " s");

  const auto ma = la.matrix(), mb = lb.matrix();
  std::size_t differing = 0;
  for (const auto& [key, d] : ma.damages) {
    const auto& e = mb.damages.at(key);
    if (d.total != e.total || d.commercial != e.commercial || d.residential != e.residential ||
        !same_ledger(ma.ledgers.at(key), mb.ledgers.at(key)))
      ++differing;
    if (la.get(key).max_depth->depth != lb.get(key).max_depth->depth) ++differing;
  }
  c.that(differing == 0, std::to_string(differing) + " scenarios differ between executions");

  // The dominant tile: largest reduction in outlet volume when its rain is removed.
  const int dominant = synthetic::kDominantTile;
  std::string shares;
  for (double rp : la.study.return_periods()) {
    const auto ranking = la.planner->rank(rp, 1.0, ma);
    c.that(!ranking.rows.empty() && ranking.rows.front().tile_id == dominant,
           "rp" + fmt(rp) + " ranks tile " +
               (ranking.rows.empty() ? std::string("none") : std::to_string(ranking.rows.front().tile_id)) +
               " first");
    const double base = ma.ledgers.at(planner::baseline_key(rp)).boundary_outflow;
    const double cap = ma.ledgers.at(planner::capture_key(dominant, 1.0, rp)).boundary_outflow;
    const double share = (base - cap) / base;
    c.that(base > 0.0 && share > 0.6, "rp" + fmt(rp) + " outlet share of tile " + std::to_string(dominant) +
                                          " is " + fmt(share));
    shares += " rp" + fmt(rp) + "=" + fmt(share);
  }
  c.note("runs " + std::to_string(a.stored_runs) + "+" + std::to_string(b.stored_runs) + ", times " +
         fmt(a.seconds) + " s / " + fmt(b.seconds) + " s, tile " + std::to_string(dominant) +
         " outlet share" + shares);
}

void capture_dominance(Check& c, const fs::path& work) {
  const auto project = work / "matrix_a" / "project.json";
  if (!fs::exists(project)) throw std::runtime_error("needs the matrix project");
  Loaded l(project);
  const auto& study = l.study;

  std::size_t worse = 0;
  for (const auto& key : l.matrix_keys()) {
    if (key.kind != planner::ScenarioKind::capture) continue;
    if (l.get(key).damages.total > l.get(planner::baseline_key(key.return_period)).damages.total) ++worse;
  }
  c.that(worse == 0, std::to_string(worse) + " capture runs exceed their baseline");

  // Tile membership from the tile rectangles.
  const int tile_id = synthetic::kDominantTile;
  const auto& tile = study.partition.tile(tile_id);
  const auto& geo = study.grid.geo;
  auto in_tile = [&](std::size_t i) {
    const double x = geo.center_x(geo.col_of(i)), y = geo.center_y(geo.row_of(i));
    return x >= tile.min_x && x < tile.max_x && y >= tile.min_y && y < tile.max_y;
  };

  // Zero rain over the tile, written out directly.
  std::vector<double> weights(geo.cell_count(), 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (study.grid.active[i] && !in_tile(i)) weights[i] = 1.0;
  for (std::size_t k = 0; k < study.redirection.size(); ++k)
    if (!in_tile(study.redirection.source[k])) weights[study.redirection.target[k]] += 1.0;

  const double rp = 10.0;
  hydro::StormScenario sc{"zeroed", study.storm_for(rp), weights, 0.0};
  const auto zeroed = hydro::run_scenario(sc, study.grid, study.props, study.solver);
  const auto full = l.get(planner::capture_key(tile_id, 1.0, rp));
  c.that(zeroed.max_depth.depth == full.max_depth->depth, "capture f=1 depth differs from zeroed rain");
  c.that(same_ledger(zeroed.ledger, full.ledger), "capture f=1 ledger differs from zeroed rain");

  std::size_t cells = 0;
  for (std::size_t i = 0; i < geo.cell_count(); ++i)
    if (study.grid.active[i] && in_tile(i)) ++cells;
  for (std::size_t k = 0; k < study.redirection.size(); ++k)
    if (in_tile(study.redirection.source[k])) ++cells;
  const double tile_rain = study.storm_for(rp).total_depth() / 1000.0 * double(cells) * geo.cell_area();
  const auto part = l.planner->run(planner::capture_key(tile_id, 0.05, rp));
  const double removed = l.get(planner::baseline_key(rp)).ledger.rain_in - part.ledger.rain_in;
  const double share = removed / tile_rain;
  c.that(std::abs(share - 0.05) <= 1e-9, "f=0.05 removed " + fmt(share) + " of the tile's rain");
  c.note("removed share " + fmt(share) + " of " + fmt(tile_rain) + " m^3; f=1 bit-identical");
}

// ---- 9 ---------------------------------------------------------------------

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("missing " + p.string());
  return json::parse(in);
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("missing " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void parity(Check& c, const fs::path& work) {
#ifndef FLOODPLAN_CLI
  c.that(false, "the command line tool was not built");
#else
  const auto dir = work / "matrix_a";
  const auto project = dir / "project.json";
  if (!fs::exists(project)) throw std::runtime_error("needs the matrix project");
  const auto out = dir / "report";
  fs::remove_all(out);

  json set{{"id", "centre-pave"},
           {"specs", json::array({{{"id", "pave"},
                                   {"type", "permeable_pavement"},
                                   {"geometry", polygon_to_geojson(rectangle(340, 300, 560, 540))}}})}};
  std::ofstream(dir / "centre-pave.json") << set.dump(2);
  const std::string cli = FLOODPLAN_CLI;
  const std::string log = " >> " + (dir / "parity.log").string() + " 2>&1";
  c.that(run_command(cli + " intervene --rp 10 --project " + project.string() + " --specs " +
                     (dir / "centre-pave.json").string() + " --out " + (dir / "intervene").string() + log) == 0,
         "intervene failed");
  c.that(run_command(cli + " report --project " + project.string() + " --out " + out.string() + log) == 0,
         "report failed");

  service::Service svc(load_project(project), {});
  auto api = [&](const std::string& path, const std::map<std::string, std::string>& q = {}) {
    const auto r = svc.handle("GET", path, q, "");
    if (r.status != 200) throw std::runtime_error("GET " + path + " returned " + std::to_string(r.status));
    return r.body;
  };

  std::vector<std::string> keys;
  for (const auto& k : svc.planner().registry().keys()) keys.push_back(k);
  std::size_t compared = 0;
  for (const auto& key : keys) {
    c.that(read_json(out / "damages" / (key + ".json")) == json::parse(api("/results/" + key + "/damages")),
           "damages differ for " + key);
    c.that(read_json(out / "ledgers" / (key + ".json")) == json::parse(api("/results/" + key + "/ledger")),
           "ledger differs for " + key);
    c.that(read_bytes(out / "depth" / (key + ".bin")) == api("/results/" + key + "/depth"),
           "depth raster differs for " + key);
    c.that(read_json(out / "exposure" / (key + ".geojson")) == json::parse(api("/results/" + key + "/exposure")),
           "exposure differs for " + key);
    ++compared;
  }
  c.that(compared >= 41, std::to_string(compared) + " stored scenarios");
  c.that(std::find(keys.begin(), keys.end(), "intervention-centre-pave-rp10") != keys.end(),
         "intervention run missing from the registry");

  for (double rp : svc.study().return_periods()) {
    std::ostringstream name;
    name << "ranking_rp" << rp << ".json";
    auto from_api = json::parse(api("/ranking", {{"rp", fmt(rp)}}));
    from_api.erase("missing_tiles");
    c.that(read_json(out / name.str()) == from_api, "ranking differs at rp" + fmt(rp));
  }
  c.that(read_json(out / "tiles.geojson") == json::parse(api("/tiles")), "tiles differ");

  const auto table = read_json(out / "interventions_centre-pave.json");
  const auto stored = json::parse(api("/interventions/centre-pave"));
  const double api_cost = stored["installation_total_gbp"].get<double>();
  bool cost_seen = false;
  for (const auto& e : table.at("evaluations")) {
    cost_seen = true;
    c.that(e.at("installation_gbp").get<double>() == api_cost, "installation total differs");
  }
  const auto& report_costs = table.at("costs");
  const auto& api_costs = stored.at("costs");
  c.that(report_costs.size() == api_costs.size(), "cost rows differ in number");
  for (std::size_t i = 0; i < std::min(report_costs.size(), api_costs.size()); ++i)
    for (const char* field : {"installation_gbp", "annual_operation_gbp", "area_m2", "volume_m3", "lifetime_years"})
      c.that(report_costs[i].at(field) == api_costs[i].at(field), std::string("cost field ") + field + " differs");
  c.that(cost_seen, "report has no intervention evaluation");
  c.note(std::to_string(compared) + " scenarios, " + std::to_string(svc.study().return_periods().size()) +
         " rankings, tiles and intervention costs compared");
#endif
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "floodplan-acceptance";
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"conservation on a closed frictionless basin", conservation},
      {"lake at rest", well_balanced},
      {"dam break against the Ritter solution", dam_break},
      {"exposure truth table and buffer statistics", exposure_table},
      {"ranking arithmetic", ranking_arithmetic},
      {"cost arithmetic", cost_arithmetic},
      {"scenario matrix on the synthetic catchment", [&](Check& c) { scenario_matrix(c, work); }},
      {"capture dominance and fractional capture", [&](Check& c) { capture_dominance(c, work); }},
      {"report and API parity", [&](Check& c) { parity(c, work); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    const auto t0 = Clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const bool ok = c.failures.empty();
    if (!ok) ++failed;
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << (i + 1) << ". " << criteria[i].first << " ("
              << fmt(seconds_since(t0)) << " s)\n";
    for (const auto& n : c.notes) std::cout << "       " << n << "\n";
    for (const auto& f : c.failures) std::cout << "       failed: " << f << "\n";
    std::cout.flush();
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
