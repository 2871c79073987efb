#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "floodplan/error.hpp"
#include "floodplan/png_render.hpp"
#include "floodplan/project.hpp"
#include "floodplan/raster_io.hpp"
#include "floodplan/registry.hpp"
#include "floodplan/reports.hpp"
#include "floodplan/service.hpp"
#include "floodplan/synthetic.hpp"

namespace fs = std::filesystem;
using namespace floodplan;

namespace {

struct Flags {
  std::string project = "project.json";
  std::string rp;
  std::string tiles = "all";
  double capture_fraction = 1.0;
  std::string out = "out";
  unsigned workers = 1;
  std::uint64_t seed = 1;
  std::string specs;
  std::string set_id;
  std::string host = "127.0.0.1";
  int port = -1;
  double size = 800.0;
};

void write(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  write_file_atomic(path, text);
}

std::vector<double> parse_rps(const std::string& text, const planner::Study& study) {
  if (text.empty() || text == "all") return study.return_periods();
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw UsageError("--rp expects numbers, got '" + item + "'");
    study.storm_for(v);
    out.push_back(v);
  }
  return out;
}

std::vector<int> parse_tiles(const std::string& text, const planner::Study& study) {
  if (text.empty() || text == "all") return planner::all_tile_ids(study.partition);
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw UsageError("--tiles expects ids or 'all'");
    study.partition.index_of(v);
    out.push_back(v);
  }
  return out;
}

struct Session {
  ProjectConfig config;
  planner::Study study;
  RunRegistry registry;
  planner::Planner planner;

  explicit Session(const std::string& project)
      : config(load_project(project)),
        study(build_study(config)),
        registry(config.registry),
        planner(study, registry) {}
};

void progress_line(std::size_t done, std::size_t total, const planner::ScenarioKey& key, bool ok) {
  std::cerr << "[" << done << "/" << total << "] " << key.to_string() << (ok ? " ok" : " FAILED")
            << "\n";
}

planner::MatrixResult run_with_progress(planner::Planner& p, const std::vector<planner::ScenarioKey>& keys,
                                        unsigned workers) {
  std::mutex mu;
  std::size_t done = 0;
  return p.run_keys(keys, workers, [&](const planner::ScenarioKey& key, bool ok) {
    std::lock_guard lock(mu);
    progress_line(++done, keys.size(), key, ok);
  });
}

nlohmann::json failures_json(const planner::MatrixResult& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, what] : m.failures) j[k.to_string()] = what;
  return j;
}

// Per-scenario artifacts; JSON bodies are byte-identical to the HTTP API.
void write_scenario(const fs::path& out, const planner::ScenarioResult& r,
                    const planner::Study& study) {
  const std::string name = r.key.to_string();
  write(out / "damages" / (name + ".json"), report::damages_to_json(r.key, r.damages).dump(2));
  write(out / "damages" / (name + ".csv"), report::damages_csv(r.damages));
  write(out / "exposure" / (name + ".csv"), report::exposure_csv(r.exposure));
  write(out / "exposure" / (name + ".geojson"),
        report::exposure_geojson(r.exposure, study.buildings).dump(2));
  std::ostringstream asc;
  write_esri_ascii(asc, r.max_depth->geo, r.max_depth->depth);
  write(out / "depth" / (name + ".asc"), asc.str());
  write(out / "depth" / (name + ".bin"), encode_binary_raster(r.max_depth->geo, r.max_depth->depth));
  write(out / "depth" / (name + ".png"), render_depth_png(r.max_depth->geo, r.max_depth->depth));
  write(out / "ledgers" / (name + ".json"),
        nlohmann::json{{"schema_version", report::kSchemaVersion},
                       {"key", name},
                       {"content_hash", r.content_hash},
                       {"steps", r.steps},
                       {"ledger", report::ledger_to_json(r.ledger)}}
            .dump(2));
}

void write_tables(const fs::path& out, const std::vector<planner::ScenarioKey>& keys,
                  const std::vector<damage::ScenarioDamages>& damages, const std::string& stem) {
  write(out / (stem + "_inundated.csv"), report::inundated_counts_csv(keys, damages));
  write(out / (stem + "_damages.csv"), report::damage_totals_csv(keys, damages));
  write(out / (stem + "_damages.json"), report::damage_totals_json(keys, damages).dump(2));
}

int cmd_validate(const Flags& f) {
  const auto config = load_project(f.project);
  const auto study = build_study(config);
  std::cout << project_to_json(config, study).dump(2) << "\n";
  return 0;
}

int cmd_baseline(const Flags& f) {
  Session s(f.project);
  const auto rps = parse_rps(f.rp, s.study);
  std::vector<planner::ScenarioKey> keys;
  for (double rp : rps) keys.push_back(planner::baseline_key(rp));
  const auto m = run_with_progress(s.planner, keys, f.workers);

  std::vector<planner::ScenarioKey> ok_keys;
  std::vector<damage::ScenarioDamages> damages;
  for (const auto& key : keys) {
    auto r = s.planner.lookup(key);
    if (!r) continue;
    write_scenario(f.out, *r, s.study);
    ok_keys.push_back(key);
    damages.push_back(r->damages);
  }
  write_tables(f.out, ok_keys, damages, "baseline");
  std::cout << report::damage_totals_json(ok_keys, damages).dump(2) << "\n";
  if (!m.failures.empty()) throw Error("failed scenarios: " + failures_json(m).dump());
  return 0;
}

int cmd_capture_scan(const Flags& f) {
  Session s(f.project);
  const auto rps = parse_rps(f.rp, s.study);
  const auto tiles = parse_tiles(f.tiles, s.study);
  if (!(f.capture_fraction >= 0.0 && f.capture_fraction <= 1.0))
    throw UsageError("--capture-fraction must lie in [0, 1]");
  std::vector<planner::ScenarioKey> keys;
  for (double rp : rps) keys.push_back(planner::baseline_key(rp));
  for (double rp : rps)
    for (int t : tiles) keys.push_back(planner::capture_key(t, f.capture_fraction, rp));
  std::cerr << "scheduling " << rps.size() << " baseline and " << rps.size() * tiles.size()
            << " capture runs\n";
  const auto m = run_with_progress(s.planner, keys, f.workers);

  std::vector<planner::ScenarioKey> ok_keys;
  std::vector<damage::ScenarioDamages> damages;
  for (const auto& [k, d] : m.damages) {
    ok_keys.push_back(k);
    damages.push_back(d);
    if (auto r = s.planner.lookup(k)) write_scenario(f.out, *r, s.study);
  }
  write_tables(f.out, ok_keys, damages, "capture_scan");
  const nlohmann::json summary{{"schema_version", report::kSchemaVersion},
                               {"scheduled", keys.size()},
                               {"solver_runs", m.solver_runs},
                               {"reused", keys.size() - m.solver_runs - m.failures.size()},
                               {"failures", failures_json(m)},
                               {"totals", report::damage_totals_json(ok_keys, damages)}};
  write(fs::path(f.out) / "capture_scan.json", summary.dump(2));
  std::cout << summary.dump(2) << "\n";
  return m.failures.empty() ? 0 : 1;
}

// Rankings from stored runs only; never starts the solver.
std::optional<planner::TileRanking> stored_ranking(Session& s, double rp, double fraction,
                                                   std::vector<int>* missing = nullptr) {
  planner::MatrixResult m;
  const auto base = s.planner.lookup(planner::baseline_key(rp));
  if (!base) return std::nullopt;
  m.damages[base->key] = base->damages;
  for (const auto& t : s.study.partition.tiles) {
    const auto key = planner::capture_key(t.id, fraction, rp);
    if (auto r = s.planner.lookup(key))
      m.damages[key] = r->damages;
    else if (missing)
      missing->push_back(t.id);
  }
  return s.planner.rank(rp, fraction, m);
}

std::string rp_text(double rp) {
  std::ostringstream o;
  o << rp;
  return o.str();
}

int cmd_rank(const Flags& f) {
  Session s(f.project);
  const auto rps = parse_rps(f.rp, s.study);
  for (double rp : rps) {
    std::vector<int> missing;
    const auto ranking = stored_ranking(s, rp, f.capture_fraction, &missing);
    if (!ranking)
      throw NotFound("baseline for return period " + rp_text(rp) + " has not been run; run `baseline` first");
    if (!missing.empty())
      std::cerr << "warning: " << missing.size() << " tile(s) lack a capture run at rp " << rp << "\n";
    const std::string csv = report::ranking_csv(*ranking, s.study.gf_threshold);
    write(fs::path(f.out) / ("ranking_rp" + rp_text(rp) + ".csv"), csv);
    write(fs::path(f.out) / ("ranking_rp" + rp_text(rp) + ".json"),
          report::ranking_to_json(*ranking, s.study.gf_threshold).dump(2));
    std::cout << csv;
  }
  return 0;
}

planner::InterventionSet load_set(const Flags& f, RunRegistry& registry) {
  if (!f.specs.empty()) {
    std::ifstream in(f.specs);
    if (!in) throw ConfigError("intervention file not found: " + f.specs, f.specs);
    const auto doc = nlohmann::json::parse(in);
    planner::InterventionSet set;
    set.id = f.set_id.empty() ? doc.at("id").get<std::string>() : f.set_id;
    for (const auto& spec : doc.at("specs")) set.specs.push_back(intervention_from_json(spec));
    return set;
  }
  if (f.set_id.empty()) throw UsageError("intervene needs --specs <file> or --set <id>");
  auto set = registry.intervention_set(f.set_id);
  if (!set) throw NotFound("unknown intervention set '" + f.set_id + "'");
  return *set;
}

int cmd_intervene(const Flags& f) {
  Session s(f.project);
  const auto set = load_set(f, s.registry);
  const auto rps = parse_rps(f.rp, s.study);
  const auto evals = s.planner.evaluate_intervention(set, rps, f.workers);
  for (double rp : rps)
    for (const auto& key : {planner::baseline_key(rp), planner::intervention_key(set.id, rp)})
      if (auto r = s.planner.lookup(key)) write_scenario(f.out, *r, s.study);
  write(fs::path(f.out) / ("interventions_" + set.id + ".csv"), report::interventions_csv(set.id, evals));
  const auto j = report::interventions_to_json(set.id, evals);
  write(fs::path(f.out) / ("interventions_" + set.id + ".json"), j.dump(2));
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_report(const Flags& f) {
  Session s(f.project);
  const fs::path out = f.out;
  const auto rps = parse_rps(f.rp, s.study);
  std::size_t scenarios = 0;

  std::vector<planner::ScenarioKey> base_keys, scan_keys;
  std::vector<damage::ScenarioDamages> base_d, scan_d;
  for (const auto& name : s.registry.keys()) {
    planner::ScenarioKey key;
    try {
      key = planner::ScenarioKey::parse(name);
    } catch (const UsageError&) {
      continue;
    }
    if (std::find(rps.begin(), rps.end(), key.return_period) == rps.end()) continue;
    std::optional<planner::ScenarioResult> r;
    try {
      r = s.planner.lookup(key);
    } catch (const NotFound&) {
      continue;  // e.g. a deleted intervention set
    }
    if (!r) continue;  // inputs changed since the run
    write_scenario(out, *r, s.study);
    ++scenarios;
    if (key.kind == planner::ScenarioKind::baseline) {
      base_keys.push_back(key);
      base_d.push_back(r->damages);
    } else {
      scan_keys.push_back(key);
      scan_d.push_back(r->damages);
    }
  }
  write_tables(out, base_keys, base_d, "baseline");
  write_tables(out, scan_keys, scan_d, "scenarios");

  nlohmann::json rankings = nlohmann::json::array();
  for (double rp : rps) {
    const auto ranking = stored_ranking(s, rp, f.capture_fraction);
    if (!ranking || ranking->rows.empty()) continue;
    write(out / ("ranking_rp" + rp_text(rp) + ".csv"),
          report::ranking_csv(*ranking, s.study.gf_threshold));
    const auto j = report::ranking_to_json(*ranking, s.study.gf_threshold);
    write(out / ("ranking_rp" + rp_text(rp) + ".json"), j.dump(2));
    rankings.push_back(rp);
  }

  nlohmann::json sets = nlohmann::json::array();
  for (const auto& set : s.registry.intervention_sets()) {
    std::vector<planner::InterventionEvaluation> evals;
    for (double rp : rps) {
      const auto base = s.planner.lookup(planner::baseline_key(rp));
      std::optional<planner::ScenarioResult> var;
      try {
        var = s.planner.lookup(planner::intervention_key(set.id, rp));
      } catch (const Error&) {
        continue;
      }
      if (!base || !var) continue;
      planner::InterventionEvaluation e;
      e.return_period = rp;
      e.baseline = base->damages;
      e.damages = var->damages;
      e.benefit = planner::benefit(e.baseline, e.damages);
      for (const auto& spec : set.specs) {
        e.costs.push_back(planner::cost_intervention(spec, s.study.costs));
        e.installation_total += e.costs.back().installation;
        e.area_total += e.costs.back().area_m2;
      }
      evals.push_back(std::move(e));
    }
    if (evals.empty()) continue;
    for (auto& e : evals)
      for (auto& c : e.costs)
        for (const auto& other : evals) {
          c.benefit[other.return_period] = other.benefit;
          c.benefit_minus_installation[other.return_period] = other.benefit - other.installation_total;
        }
    write(out / ("interventions_" + set.id + ".csv"), report::interventions_csv(set.id, evals));
    write(out / ("interventions_" + set.id + ".json"),
          report::interventions_to_json(set.id, evals).dump(2));
    sets.push_back(set.id);
  }
  write(out / "tiles.geojson", report::tiles_geojson(s.study.partition).dump(2));

  const nlohmann::json summary{{"schema_version", report::kSchemaVersion},
                               {"out", out.string()},
                               {"scenarios", scenarios},
                               {"rankings_rp", rankings},
                               {"intervention_sets", sets}};
  std::cout << summary.dump(2) << "\n";
  return 0;
}

service::Service* g_service = nullptr;

int cmd_serve(const Flags& f) {
  service::Options opt;
  opt.host = f.host;
  opt.workers = f.workers;
  if (f.port >= 0)
    opt.port = f.port;
  else if (const char* env = std::getenv("FLOODPLAN_PORT"))
    opt.port = std::atoi(env);
  service::Service svc(load_project(f.project), opt);
  const int port = svc.bind();
  std::cerr << "serving project " << f.project << " on http://" << opt.host << ":" << port << "\n";
  g_service = &svc;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });
  svc.serve();
  g_service = nullptr;
  return 0;
}

int cmd_make_fixture(const Flags& f) {
  synthetic::CatchmentOptions opt;
  opt.seed = f.seed;
  opt.size_m = f.size;
  const auto path = synthetic::write_catchment_project(f.out, opt);
  std::cout << nlohmann::json{{"schema_version", report::kSchemaVersion}, {"project", path.string()}}.dump(2)
            << "\n";
  return 0;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return 2;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const UnsupportedFormat*>(&e))
    return 3;
  if (dynamic_cast<const NotFound*>(&e)) return 4;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"floodplan: pluvial flood scenario and cost-benefit planning engine"};
  app.require_subcommand(1);
  Flags f;

  auto project_opt = [&](CLI::App* sub) {
    sub->add_option("--project", f.project, "Project file (JSON)")->capture_default_str();
  };
  auto common = [&](CLI::App* sub) {
    project_opt(sub);
    sub->add_option("--rp", f.rp, "Return periods in years, comma separated, or 'all'");
    sub->add_option("--out", f.out, "Output directory")->capture_default_str();
    sub->add_option("--workers", f.workers, "Concurrent scenario runs")->capture_default_str();
  };

  auto* validate = app.add_subcommand("validate", "Check that the project and its inputs load");
  project_opt(validate);
  auto* baseline = app.add_subcommand("baseline", "Run the baseline storm(s)");
  common(baseline);
  auto* scan = app.add_subcommand("capture-scan", "Baselines plus one capture run per tile and storm");
  common(scan);
  scan->add_option("--tiles", f.tiles, "Tile ids, comma separated, or 'all'")->capture_default_str();
  scan->add_option("--capture-fraction", f.capture_fraction, "Share of rain removed in the tile")
      ->capture_default_str();
  auto* rank = app.add_subcommand("rank", "Rank tiles by benefit x green fraction from stored runs");
  common(rank);
  rank->add_option("--capture-fraction", f.capture_fraction)->capture_default_str();
  auto* intervene = app.add_subcommand("intervene", "Evaluate an intervention set against the baselines");
  common(intervene);
  intervene->add_option("--specs", f.specs, "Intervention set file {id, specs: [...]}");
  intervene->add_option("--set", f.set_id, "Stored intervention set id");
  auto* rep = app.add_subcommand("report", "Write tables, rasters and per-scenario artifacts");
  common(rep);
  rep->add_option("--capture-fraction", f.capture_fraction)->capture_default_str();
  auto* serve = app.add_subcommand("serve", "Start the HTTP service (port from --port or FLOODPLAN_PORT)");
  project_opt(serve);
  serve->add_option("--host", f.host)->capture_default_str();
  serve->add_option("--port", f.port, "Port; defaults to $FLOODPLAN_PORT, else 8080");
  serve->add_option("--workers", f.workers)->capture_default_str();
  auto* fixture = app.add_subcommand("make-fixture", "Write the synthetic catchment project");
  fixture->add_option("--out", f.out, "Output directory")->capture_default_str();
  fixture->add_option("--seed", f.seed, "Seed of the terrain roughness")->capture_default_str();
  fixture->add_option("--size", f.size, "Domain side in metres")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (validate->parsed()) return cmd_validate(f);
    if (baseline->parsed()) return cmd_baseline(f);
    if (scan->parsed()) return cmd_capture_scan(f);
    if (rank->parsed()) return cmd_rank(f);
    if (intervene->parsed()) return cmd_intervene(f);
    if (rep->parsed()) return cmd_report(f);
    if (serve->parsed()) return cmd_serve(f);
    if (fixture->parsed()) return cmd_make_fixture(f);
  } catch (const std::exception& e) {
    std::cerr << report::error_to_json(stage, e).dump(2) << "\n";
    return exit_code(e);
  }
  return 1;
}
