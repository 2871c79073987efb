#include "floodplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "floodplan/error.hpp"
#include "floodplan/registry.hpp"

namespace floodplan::planner {

namespace {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double parse_number(const std::string& text, const std::string& whole) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size() || !std::isfinite(v))
    throw UsageError("malformed scenario key '" + whole + "'");
  return v;
}

bool valid_set_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.';
  });
}

}  // namespace

std::string ScenarioKey::to_string() const {
  const std::string rp = "-rp" + format_number(return_period);
  switch (kind) {
    case ScenarioKind::baseline: return "baseline" + rp;
    case ScenarioKind::capture:
      return "capture-t" + std::to_string(tile_id) + "-f" + format_number(fraction) + rp;
    case ScenarioKind::intervention: return "intervention-" + intervention_set + rp;
  }
  return {};
}

ScenarioKey ScenarioKey::parse(const std::string& text) {
  const auto rp_at = text.rfind("-rp");
  if (rp_at == std::string::npos) throw UsageError("malformed scenario key '" + text + "'");
  ScenarioKey key;
  key.return_period = parse_number(text.substr(rp_at + 3), text);
  if (!(key.return_period > 0.0)) throw UsageError("return period must be positive in '" + text + "'");
  const std::string head = text.substr(0, rp_at);

  if (head == "baseline") return key;
  if (head.rfind("capture-t", 0) == 0) {
    const auto f_at = head.find("-f", 9);
    if (f_at == std::string::npos) throw UsageError("malformed scenario key '" + text + "'");
    const double tile = parse_number(head.substr(9, f_at - 9), text);
    if (tile != std::floor(tile) || tile < 1 || tile > 1e9)
      throw UsageError("malformed tile id in '" + text + "'");
    key.kind = ScenarioKind::capture;
    key.tile_id = static_cast<int>(tile);
    key.fraction = parse_number(head.substr(f_at + 2), text);
    if (!(key.fraction >= 0.0 && key.fraction <= 1.0))
      throw UsageError("capture fraction out of [0, 1] in '" + text + "'");
    return key;
  }
  if (head.rfind("intervention-", 0) == 0) {
    key.kind = ScenarioKind::intervention;
    key.intervention_set = head.substr(13);
    if (!valid_set_id(key.intervention_set))
      throw UsageError("malformed intervention set id in '" + text + "'");
    return key;
  }
  throw UsageError("malformed scenario key '" + text + "'");
}

ScenarioKey baseline_key(double rp) {
  ScenarioKey k;
  k.return_period = rp;
  return k;
}

ScenarioKey capture_key(int tile_id, double fraction, double rp) {
  ScenarioKey k;
  k.kind = ScenarioKind::capture;
  k.tile_id = tile_id;
  k.fraction = fraction;
  k.return_period = rp;
  return k;
}

ScenarioKey intervention_key(const std::string& set_id, double rp) {
  if (!valid_set_id(set_id))
    throw UsageError("intervention set id '" + set_id + "' must match [A-Za-z0-9_.-]{1,64}");
  ScenarioKey k;
  k.kind = ScenarioKind::intervention;
  k.intervention_set = set_id;
  k.return_period = rp;
  return k;
}

CostReport cost_intervention(const InterventionSpec& spec, const CostModel& rates) {
  CostReport r;
  r.intervention_id = spec.id;
  r.type = spec.type;
  if (spec.type == InterventionType::rain_capture) {
    r.buildable = false;
    r.note = "idealised rainfall capture; not a buildable feature";
    return r;
  }
  spec.validate();
  r.area_m2 = spec.area();
  if (spec.type == InterventionType::permeable_pavement) {
    r.installation = r.area_m2 * rates.pavement_install_per_m2;
    r.annual_operation = r.area_m2 * rates.pavement_annual_per_m2;
    r.lifetime_years = rates.pavement_life_years;
  } else {
    r.volume_m3 = spec.pond_volume;
    r.installation = spec.pond_volume * rates.pond_rate_per_m3();
    r.annual_operation = r.area_m2 * rates.pond_annual_per_m2;
    r.lifetime_years = rates.pond_life_years;
  }
  return r;
}

double benefit(const damage::ScenarioDamages& base, const damage::ScenarioDamages& variant) {
  if (base.return_period != variant.return_period)
    throw UsageError("benefit compares scenarios of different return periods (" +
                     format_number(base.return_period) + " vs " +
                     format_number(variant.return_period) + ")");
  return base.total - variant.total;
}

TileRanking rank_tiles(std::span<const TileBenefit> benefits, double return_period,
                       double capture_fraction) {
  TileRanking out;
  out.return_period = return_period;
  out.capture_fraction = capture_fraction;
  for (const auto& b : benefits) {
    RankingRow row;
    row.tile_id = b.tile_id;
    row.benefit = b.benefit;
    row.green_fraction = b.green_fraction;
    row.score = (b.benefit / 1e6) * b.green_fraction;
    row.variant_commercial = b.variant.commercial;
    row.variant_residential = b.variant.residential;
    row.variant_total = b.variant.total;
    out.rows.push_back(row);
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const RankingRow& a, const RankingRow& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.benefit != b.benefit) return a.benefit > b.benefit;
    return a.tile_id < b.tile_id;
  });
  for (std::size_t i = 0; i < out.rows.size(); ++i) out.rows[i].rank = static_cast<int>(i + 1);
  return out;
}

InterventionType suggest_intervention(const RankingRow& row, double gf_threshold) {
  return row.green_fraction >= gf_threshold ? InterventionType::detention_pond
                                            : InterventionType::permeable_pavement;
}

double expected_annual_damage(std::span<const std::pair<double, double>> rp_and_damage) {
  std::vector<std::pair<double, double>> pts;  // (probability, damage)
  for (const auto& [rp, d] : rp_and_damage) {
    if (!(rp > 0.0)) throw UsageError("return periods must be positive");
    pts.emplace_back(1.0 / rp, d);
  }
  std::sort(pts.begin(), pts.end());
  double ead = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    ead += (pts[i].first - pts[i - 1].first) * 0.5 * (pts[i].second + pts[i - 1].second);
  return ead;
}

const storm::Hyetograph& Study::storm_for(double rp) const {
  for (const auto& s : storms)
    if (s.return_period == rp) return s;
  throw ConfigError("no storm configured for return period " + format_number(rp));
}

std::vector<double> Study::return_periods() const {
  std::vector<double> out;
  for (const auto& s : storms) out.push_back(s.return_period);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> all_tile_ids(const geo::TilePartition& partition) {
  std::vector<int> ids;
  for (const auto& t : partition.tiles) ids.push_back(t.id);
  return ids;
}

Planner::Planner(const Study& study, RunRegistry& registry) : study_(study), registry_(registry) {}

Planner::Inputs Planner::resolve(const ScenarioKey& key) const {
  Inputs in{&study_.grid, &study_.props, std::nullopt, {}, &study_.storm_for(key.return_period)};
  std::vector<storm::CaptureSpec> captures;
  switch (key.kind) {
    case ScenarioKind::baseline: break;
    case ScenarioKind::capture:
      study_.partition.index_of(key.tile_id);  // NotFound for unknown tiles
      captures.push_back({key.tile_id, key.fraction});
      break;
    case ScenarioKind::intervention: {
      const auto set = registry_.intervention_set(key.intervention_set);
      if (!set) throw NotFound("unknown intervention set '" + key.intervention_set + "'");
      for (const auto& spec : set->specs)
        if (spec.type == InterventionType::rain_capture)
          captures.push_back({spec.tile_id, spec.fraction});
      in.modified = hydro::apply_interventions(study_.grid, study_.props, study_.landuse,
                                               set->specs, study_.surface);
      in.grid = &in.modified->grid;
      in.props = &in.modified->props;
      break;
    }
  }
  in.weights = storm::rain_weights(*in.grid, captures, study_.redirection, study_.partition);
  return in;
}

std::string Planner::hash_inputs(const Inputs& in) const {
  Sha256 h;
  h.update("floodplan-run-1");
  const GridGeometry& g = in.grid->geo;
  const double geo_values[] = {g.origin_x, g.origin_y, g.cell_size};
  const std::uint64_t dims[] = {g.n_rows, g.n_cols};
  h.update(geo_values, sizeof geo_values).update(dims, sizeof dims);
  h.update_values(in.grid->elevation).update_values(in.grid->active);
  h.update_values(in.props->manning)
      .update_values(in.props->infiltration_rate)
      .update_values(in.props->infiltration_capacity)
      .update_values(in.props->pond);
  h.update_values(in.weights);

  const storm::Hyetograph& s = *in.storm;
  const double storm_values[] = {s.return_period, s.duration, s.dt};
  h.update(storm_values, sizeof storm_values).update_values(s.intensity);

  const hydro::SolverSettings& cfg = study_.solver;
  const double solver_values[] = {cfg.cfl, cfg.dry_threshold, cfg.dt_max, cfg.gravity,
                                  cfg.drain_down, cfg.conservation_tolerance};
  const std::uint8_t edges[] = {cfg.open.north, cfg.open.south, cfg.open.east, cfg.open.west};
  h.update(solver_values, sizeof solver_values).update(edges, sizeof edges);
  return h.hex_digest();
}

std::string Planner::content_hash(const ScenarioKey& key) const { return hash_inputs(resolve(key)); }

ScenarioResult Planner::finish(const ScenarioKey& key, std::string hash,
                               std::shared_ptr<const hydro::MaxDepthRaster> raster,
                               const hydro::VolumeLedger& ledger, std::size_t steps,
                               bool reused) const {
  ScenarioResult r;
  r.key = key;
  r.content_hash = std::move(hash);
  r.ledger = ledger;
  r.steps = steps;
  r.reused = reused;
  r.exposure = exposure::classify_all(raster->depth, study_.buildings);
  r.damages = damage::assess(raster->depth, study_.buildings, study_.curves,
                             study_.grid.geo.cell_area());
  r.damages.scenario_id = key.to_string();
  r.damages.return_period = key.return_period;
  r.max_depth = std::move(raster);
  return r;
}

ScenarioResult Planner::run(const ScenarioKey& key, const hydro::ProgressFn& progress) {
  Inputs in = resolve(key);
  const std::string hash = hash_inputs(in);
  const std::string name = key.to_string();

  auto reuse = [&]() -> std::optional<ScenarioResult> {
    auto stored = registry_.find(hash);
    if (!stored) return std::nullopt;
    registry_.link_key(name, hash);
    if (progress) progress(1.0);
    return finish(key, hash, stored->max_depth, stored->ledger, stored->steps, true);
  };
  if (auto r = reuse()) return std::move(*r);
  if (!registry_.begin_compute(hash)) {
    if (auto r = reuse()) return std::move(*r);
    throw Error("run " + hash + " vanished from the registry");
  }

  hydro::RunResult result;
  try {
    hydro::StormScenario scenario{name, *in.storm, std::move(in.weights), 0.0};
    ++solver_invocations_;
    result = hydro::run_scenario(scenario, *in.grid, *in.props, study_.solver, progress);
    registry_.store(hash, name, result);
  } catch (...) {
    registry_.end_compute(hash);
    throw;
  }
  registry_.end_compute(hash);
  auto raster = std::make_shared<hydro::MaxDepthRaster>(std::move(result.max_depth));
  return finish(key, hash, std::move(raster), result.ledger, result.steps, false);
}

std::optional<ScenarioResult> Planner::lookup(const ScenarioKey& key) const {
  const std::string hash = content_hash(key);
  auto stored = registry_.find(hash);
  if (!stored) return std::nullopt;
  return finish(key, hash, stored->max_depth, stored->ledger, stored->steps, true);
}

MatrixResult Planner::run_keys(const std::vector<ScenarioKey>& keys, unsigned workers,
                               const std::function<void(const ScenarioKey&, bool)>& on_done) {
  MatrixResult out;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < keys.size(); i = next++) {
      const ScenarioKey& key = keys[i];
      bool ok = true;
      try {
        ScenarioResult r = run(key);
        std::lock_guard lock(mu);
        out.damages[key] = std::move(r.damages);
        out.ledgers[key] = r.ledger;
        if (!r.reused) ++out.solver_runs;
      } catch (const std::exception& e) {
        ok = false;
        std::lock_guard lock(mu);
        out.failures[key] = e.what();
      }
      if (on_done) on_done(key, ok);
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(keys.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

MatrixResult Planner::run_matrix(std::span<const double> rps, std::span<const int> tiles,
                                 double fraction, unsigned workers) {
  std::vector<ScenarioKey> keys;
  for (double rp : rps) {
    study_.storm_for(rp);
    keys.push_back(baseline_key(rp));
  }
  for (double rp : rps)
    for (int tile : tiles) keys.push_back(capture_key(tile, fraction, rp));
  return run_keys(keys, workers);
}

TileRanking Planner::rank(double rp, double fraction, const MatrixResult& matrix) const {
  auto base = matrix.damages.find(baseline_key(rp));
  if (base == matrix.damages.end())
    throw UsageError("baseline for return period " + format_number(rp) + " has not been run");
  std::vector<TileBenefit> benefits;
  for (const auto& tile : study_.partition.tiles) {
    auto it = matrix.damages.find(capture_key(tile.id, fraction, rp));
    if (it == matrix.damages.end()) continue;
    benefits.push_back({tile.id, benefit(base->second, it->second),
                        study_.partition.green_fraction[study_.partition.index_of(tile.id)],
                        it->second});
  }
  return rank_tiles(benefits, rp, fraction);
}

std::vector<InterventionEvaluation> Planner::evaluate_intervention(const InterventionSet& set,
                                                                   std::span<const double> rps,
                                                                   unsigned workers) {
  if (!valid_set_id(set.id))
    throw UsageError("intervention set id '" + set.id + "' must match [A-Za-z0-9_.-]{1,64}");
  for (const auto& spec : set.specs) spec.validate();

  // Register the set unless an identical one is already stored.
  auto specs_json = [](const std::vector<InterventionSpec>& specs) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : specs) j.push_back(intervention_to_json(s));
    return j;
  };
  const auto stored = registry_.intervention_set(set.id);
  if (!stored || specs_json(stored->specs) != specs_json(set.specs))
    registry_.put_intervention_set(set.id, set.specs);

  std::vector<ScenarioKey> keys;
  for (double rp : rps) {
    keys.push_back(baseline_key(rp));
    keys.push_back(intervention_key(set.id, rp));
  }
  const MatrixResult m = run_keys(keys, workers);
  if (!m.failures.empty()) {
    const auto& [key, what] = *m.failures.begin();
    throw Error("scenario " + key.to_string() + " failed: " + what);
  }

  std::vector<CostReport> costs;
  double installation = 0.0, area = 0.0;
  for (const auto& spec : set.specs) {
    costs.push_back(cost_intervention(spec, study_.costs));
    installation += costs.back().installation;
    area += costs.back().area_m2;
  }

  std::vector<InterventionEvaluation> out;
  for (double rp : rps) {
    InterventionEvaluation e;
    e.return_period = rp;
    e.baseline = m.damages.at(baseline_key(rp));
    e.damages = m.damages.at(intervention_key(set.id, rp));
    e.benefit = benefit(e.baseline, e.damages);
    e.installation_total = installation;
    e.area_total = area;
    out.push_back(std::move(e));
  }
  for (auto& c : costs)
    for (const auto& e : out) {
      c.benefit[e.return_period] = e.benefit;
      c.benefit_minus_installation[e.return_period] = e.benefit - installation;
    }
  for (auto& e : out) e.costs = costs;
  return out;
}

}  // namespace floodplan::planner
