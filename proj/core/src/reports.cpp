#include "floodplan/reports.hpp"

#include <cstdio>
#include <sstream>

#include "floodplan/error.hpp"
#include "floodplan/geojson.hpp"

namespace floodplan::report {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string general(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string money(double v) { return fixed(v, 2); }

// Quotes a CSV field when it carries a separator or quote.
std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

nlohmann::json totals_json(const damage::ScenarioDamages& d) {
  return {{"commercial_gbp", d.commercial},
          {"residential_gbp", d.residential},
          {"total_gbp", d.total},
          {"counts",
           {{"low", d.counts.low},
            {"medium", d.counts.medium},
            {"high", d.counts.high},
            {"inundated", d.counts.inundated()}}}};
}

}  // namespace

std::string fd_label(const planner::ScenarioKey& key) {
  std::string out = "FD(" + general(key.return_period) + "y";
  switch (key.kind) {
    case planner::ScenarioKind::baseline: break;
    case planner::ScenarioKind::capture:
      out += ", rc_" + std::to_string(key.tile_id);
      if (key.fraction != 1.0) out += ", " + general(key.fraction * 100.0) + "%";
      break;
    case planner::ScenarioKind::intervention: out += ", fc_" + key.intervention_set; break;
  }
  return out + ")";
}

nlohmann::json ledger_to_json(const hydro::VolumeLedger& l) {
  return {{"rain_in_m3", l.rain_in},
          {"infiltrated_m3", l.infiltrated},
          {"boundary_outflow_m3", l.boundary_outflow},
          {"stored_m3", l.stored},
          {"pond_stored_m3", l.pond_stored},
          {"initial_stored_m3", l.initial_stored},
          {"positivity_fix_m3", l.positivity_fix},
          {"relative_error", l.relative_error()}};
}

hydro::VolumeLedger ledger_from_json(const nlohmann::json& j) {
  hydro::VolumeLedger l;
  l.rain_in = j.at("rain_in_m3").get<double>();
  l.infiltrated = j.at("infiltrated_m3").get<double>();
  l.boundary_outflow = j.at("boundary_outflow_m3").get<double>();
  l.stored = j.at("stored_m3").get<double>();
  l.pond_stored = j.value("pond_stored_m3", 0.0);
  l.initial_stored = j.value("initial_stored_m3", 0.0);
  l.positivity_fix = j.value("positivity_fix_m3", 0.0);
  return l;
}

nlohmann::json damages_to_json(const planner::ScenarioKey& key,
                               const damage::ScenarioDamages& d) {
  nlohmann::json buildings = nlohmann::json::array();
  for (const auto& b : d.buildings)
    buildings.push_back({{"id", b.building_id},
                         {"use_class", geo::to_string(b.use_class)},
                         {"exposure_class", exposure::to_string(b.exposure_class)},
                         {"damage_gbp", b.damage}});
  nlohmann::json j{{"schema_version", kSchemaVersion},
                   {"key", key.to_string()},
                   {"label", fd_label(key)},
                   {"return_period_years", d.return_period},
                   {"buildings", std::move(buildings)}};
  j.update(totals_json(d));
  return j;
}

std::string damages_csv(const damage::ScenarioDamages& d) {
  std::ostringstream out;
  out << "building_id,use_class,exposure_class,damage_gbp\n";
  for (const auto& b : d.buildings)
    out << field(b.building_id) << ',' << geo::to_string(b.use_class) << ','
        << exposure::to_string(b.exposure_class) << ',' << money(b.damage) << '\n';
  return out.str();
}

std::string exposure_csv(std::span<const exposure::ExposureRecord> records) {
  std::ostringstream out;
  out << "building_id,use_class,mean_depth_m,p90_depth_m,exposure_class,empty_buffer,"
         "unlisted_combination\n";
  for (const auto& r : records)
    out << field(r.building_id) << ',' << geo::to_string(r.use_class) << ','
        << fixed(r.mean_depth, 6) << ',' << fixed(r.p90_depth, 6) << ','
        << exposure::to_string(r.exposure_class) << ',' << (r.empty_buffer ? "true" : "false")
        << ',' << (r.unlisted_combination ? "true" : "false") << '\n';
  return out.str();
}

nlohmann::json exposure_geojson(std::span<const exposure::ExposureRecord> records,
                                std::span<const geo::BuildingFootprint> buildings) {
  if (records.size() != buildings.size())
    throw UsageError("exposure records do not match the building list");
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    features.push_back({{"type", "Feature"},
                        {"geometry", polygon_to_geojson(buildings[i].polygon)},
                        {"properties",
                         {{"id", r.building_id},
                          {"use_class", geo::to_string(r.use_class)},
                          {"mean_depth_m", r.mean_depth},
                          {"p90_depth_m", r.p90_depth},
                          {"exposure_class", exposure::to_string(r.exposure_class)},
                          {"empty_buffer", r.empty_buffer},
                          {"unlisted_combination", r.unlisted_combination}}}});
  }
  return {{"type", "FeatureCollection"},
          {"schema_version", kSchemaVersion},
          {"features", std::move(features)}};
}

std::string inundated_counts_csv(std::span<const planner::ScenarioKey> keys,
                                 std::span<const damage::ScenarioDamages> damages) {
  std::ostringstream out;
  out << "scenario,medium,high,total\n";
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& c = damages[i].counts;
    out << field(fd_label(keys[i])) << ',' << c.medium << ',' << c.high << ',' << c.inundated()
        << '\n';
  }
  return out.str();
}

std::string damage_totals_csv(std::span<const planner::ScenarioKey> keys,
                              std::span<const damage::ScenarioDamages> damages) {
  std::ostringstream out;
  out << "scenario,commercial_gbp,residential_gbp,total_gbp\n";
  for (std::size_t i = 0; i < keys.size(); ++i)
    out << field(fd_label(keys[i])) << ',' << money(damages[i].commercial) << ','
        << money(damages[i].residential) << ',' << money(damages[i].total) << '\n';
  return out.str();
}

nlohmann::json damage_totals_json(std::span<const planner::ScenarioKey> keys,
                                  std::span<const damage::ScenarioDamages> damages) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    nlohmann::json row{{"key", keys[i].to_string()}, {"label", fd_label(keys[i])}};
    row.update(totals_json(damages[i]));
    rows.push_back(std::move(row));
  }
  return {{"schema_version", kSchemaVersion}, {"scenarios", std::move(rows)}};
}

std::string ranking_csv(const planner::TileRanking& ranking, double gf_threshold) {
  std::ostringstream out;
  out << "rank,tile_id,scenario,benefit_gbp,green_fraction,score,variant_total_gbp,suggestion\n";
  for (const auto& row : ranking.rows) {
    const auto key = planner::capture_key(row.tile_id, ranking.capture_fraction,
                                          ranking.return_period);
    out << row.rank << ',' << row.tile_id << ',' << field(fd_label(key)) << ','
        << money(row.benefit) << ',' << fixed(row.green_fraction, 6) << ','
        << fixed(row.score, 4) << ',' << money(row.variant_total) << ','
        << to_string(planner::suggest_intervention(row, gf_threshold)) << '\n';
  }
  return out.str();
}

nlohmann::json ranking_to_json(const planner::TileRanking& ranking, double gf_threshold) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : ranking.rows) {
    const auto key = planner::capture_key(row.tile_id, ranking.capture_fraction,
                                          ranking.return_period);
    rows.push_back({{"rank", row.rank},
                    {"tile_id", row.tile_id},
                    {"key", key.to_string()},
                    {"label", fd_label(key)},
                    {"benefit_gbp", row.benefit},
                    {"green_fraction", row.green_fraction},
                    {"score", row.score},
                    {"variant_commercial_gbp", row.variant_commercial},
                    {"variant_residential_gbp", row.variant_residential},
                    {"variant_total_gbp", row.variant_total},
                    {"suggestion", to_string(planner::suggest_intervention(row, gf_threshold))}});
  }
  return {{"schema_version", kSchemaVersion},
          {"return_period_years", ranking.return_period},
          {"capture_fraction", ranking.capture_fraction},
          {"gf_threshold", gf_threshold},
          {"rows", std::move(rows)}};
}

nlohmann::json cost_to_json(const planner::CostReport& c) {
  nlohmann::json benefit = nlohmann::json::object();
  nlohmann::json net = nlohmann::json::object();
  for (const auto& [rp, b] : c.benefit) benefit[general(rp)] = b;
  for (const auto& [rp, b] : c.benefit_minus_installation) net[general(rp)] = b;
  return {{"intervention_id", c.intervention_id},
          {"type", to_string(c.type)},
          {"area_m2", c.area_m2},
          {"volume_m3", c.volume_m3},
          {"installation_gbp", c.installation},
          {"annual_operation_gbp", c.annual_operation},
          {"lifetime_years", c.lifetime_years},
          {"buildable", c.buildable},
          {"note", c.note},
          {"benefit_gbp", std::move(benefit)},
          {"benefit_minus_installation_gbp", std::move(net)}};
}

std::string interventions_csv(const std::string& set_id,
                              std::span<const planner::InterventionEvaluation> evals) {
  std::ostringstream out;
  out << "scenario,baseline_total_gbp,intervention_total_gbp,benefit_gbp,installation_gbp,"
         "benefit_minus_installation_gbp,area_m2\n";
  for (const auto& e : evals) {
    const auto key = planner::intervention_key(set_id, e.return_period);
    out << field(fd_label(key)) << ',' << money(e.baseline.total) << ',' << money(e.damages.total)
        << ',' << money(e.benefit) << ',' << money(e.installation_total) << ','
        << money(e.benefit - e.installation_total) << ',' << fixed(e.area_total, 3) << '\n';
  }
  return out.str();
}

nlohmann::json interventions_to_json(const std::string& set_id,
                                     std::span<const planner::InterventionEvaluation> evals) {
  nlohmann::json rows = nlohmann::json::array();
  nlohmann::json costs = nlohmann::json::array();
  for (const auto& e : evals) {
    const auto key = planner::intervention_key(set_id, e.return_period);
    rows.push_back({{"key", key.to_string()},
                    {"label", fd_label(key)},
                    {"return_period_years", e.return_period},
                    {"baseline", totals_json(e.baseline)},
                    {"intervention", totals_json(e.damages)},
                    {"benefit_gbp", e.benefit},
                    {"installation_gbp", e.installation_total},
                    {"benefit_minus_installation_gbp", e.benefit - e.installation_total},
                    {"area_m2", e.area_total}});
  }
  if (!evals.empty())
    for (const auto& c : evals.front().costs) costs.push_back(cost_to_json(c));
  return {{"schema_version", kSchemaVersion},
          {"intervention_set", set_id},
          {"evaluations", std::move(rows)},
          {"costs", std::move(costs)}};
}

nlohmann::json diff_to_json(const planner::ScenarioKey& base_key,
                            const damage::ScenarioDamages& base,
                            const planner::ScenarioKey& variant_key,
                            const damage::ScenarioDamages& variant) {
  const double total_benefit = planner::benefit(base, variant);
  if (base.buildings.size() != variant.buildings.size())
    throw UsageError("scenarios cover different building sets");
  nlohmann::json deltas = nlohmann::json::array();
  for (std::size_t i = 0; i < base.buildings.size(); ++i) {
    const auto& b = base.buildings[i];
    const auto& v = variant.buildings[i];
    if (b.damage == v.damage && b.exposure_class == v.exposure_class) continue;
    deltas.push_back({{"id", b.building_id},
                      {"use_class", geo::to_string(b.use_class)},
                      {"base_class", exposure::to_string(b.exposure_class)},
                      {"variant_class", exposure::to_string(v.exposure_class)},
                      {"base_damage_gbp", b.damage},
                      {"variant_damage_gbp", v.damage},
                      {"damage_change_gbp", v.damage - b.damage}});
  }
  return {{"schema_version", kSchemaVersion},
          {"base", {{"key", base_key.to_string()}, {"label", fd_label(base_key)}}},
          {"variant", {{"key", variant_key.to_string()}, {"label", fd_label(variant_key)}}},
          {"base_totals", totals_json(base)},
          {"variant_totals", totals_json(variant)},
          {"benefit_gbp", total_benefit},
          {"buildings", std::move(deltas)}};
}

nlohmann::json tiles_geojson(const geo::TilePartition& partition) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t i = 0; i < partition.tiles.size(); ++i) {
    const auto& t = partition.tiles[i];
    features.push_back(
        {{"type", "Feature"},
         {"geometry", polygon_to_geojson(rectangle(t.min_x, t.min_y, t.max_x, t.max_y))},
         {"properties",
          {{"id", t.id},
           {"green_fraction", i < partition.green_fraction.size() ? partition.green_fraction[i] : 0.0},
           {"active_cells", t.active_cells},
           {"building_cells", t.building_cells}}}});
  }
  return {{"type", "FeatureCollection"},
          {"schema_version", kSchemaVersion},
          {"tile_size_m", partition.tile_size},
          {"features", std::move(features)}};
}

nlohmann::json error_to_json(const std::string& stage, const std::exception& e) {
  nlohmann::json j{{"schema_version", kSchemaVersion},
                   {"status", "error"},
                   {"stage", stage},
                   {"kind", "error"},
                   {"message", e.what()}};
  if (const auto* err = dynamic_cast<const Error*>(&e)) j["kind"] = err->kind();
  if (const auto* pe = dynamic_cast<const ParseError*>(&e); pe && pe->line() > 0)
    j["line"] = pe->line();
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e); ce && !ce->path().empty())
    j["path"] = ce->path();
  if (const auto* sd = dynamic_cast<const SolverDivergence*>(&e)) {
    j["cell"] = sd->cell();
    j["time_s"] = sd->time();
  }
  return j;
}

}  // namespace floodplan::report
