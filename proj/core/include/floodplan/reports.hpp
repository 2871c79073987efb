#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "floodplan/damage.hpp"
#include "floodplan/exposure.hpp"
#include "floodplan/geodata.hpp"
#include "floodplan/hydro.hpp"
#include "floodplan/planner.hpp"

// Serialisation shared by the CLI and the HTTP service, so both emit
// byte-identical payloads for the same scenario.
namespace floodplan::report {

inline constexpr int kSchemaVersion = 1;

/// "FD(10y)", "FD(10y, rc_17)", "FD(10y, rc_17, 5%)", "FD(10y, fc_<set>)".
std::string fd_label(const planner::ScenarioKey& key);

nlohmann::json ledger_to_json(const hydro::VolumeLedger& ledger);
hydro::VolumeLedger ledger_from_json(const nlohmann::json& j);

nlohmann::json damages_to_json(const planner::ScenarioKey& key,
                               const damage::ScenarioDamages& damages);
std::string damages_csv(const damage::ScenarioDamages& damages);

std::string exposure_csv(std::span<const exposure::ExposureRecord> records);
nlohmann::json exposure_geojson(std::span<const exposure::ExposureRecord> records,
                                std::span<const geo::BuildingFootprint> buildings);

/// Inundated building counts per baseline: FD(rp),Medium,High,Total.
std::string inundated_counts_csv(std::span<const planner::ScenarioKey> keys,
                                 std::span<const damage::ScenarioDamages> damages);
/// Damage totals per scenario: FD(rp),Commercial,Residential,Total.
std::string damage_totals_csv(std::span<const planner::ScenarioKey> keys,
                              std::span<const damage::ScenarioDamages> damages);
nlohmann::json damage_totals_json(std::span<const planner::ScenarioKey> keys,
                                  std::span<const damage::ScenarioDamages> damages);

std::string ranking_csv(const planner::TileRanking& ranking, double gf_threshold);
nlohmann::json ranking_to_json(const planner::TileRanking& ranking, double gf_threshold);

nlohmann::json cost_to_json(const planner::CostReport& cost);
std::string interventions_csv(const std::string& set_id,
                              std::span<const planner::InterventionEvaluation> evals);
nlohmann::json interventions_to_json(const std::string& set_id,
                                     std::span<const planner::InterventionEvaluation> evals);

/// Per-building damage deltas (non-zero only), totals and benefit.
nlohmann::json diff_to_json(const planner::ScenarioKey& base_key,
                            const damage::ScenarioDamages& base,
                            const planner::ScenarioKey& variant_key,
                            const damage::ScenarioDamages& variant);

nlohmann::json tiles_geojson(const geo::TilePartition& partition);

nlohmann::json error_to_json(const std::string& stage, const std::exception& e);

}  // namespace floodplan::report
