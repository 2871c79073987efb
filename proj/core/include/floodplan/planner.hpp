#pragma once

#include <atomic>
#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "floodplan/damage.hpp"
#include "floodplan/exposure.hpp"
#include "floodplan/geodata.hpp"
#include "floodplan/hydro.hpp"
#include "floodplan/interventions.hpp"
#include "floodplan/storm.hpp"

namespace floodplan {
class RunRegistry;
}

namespace floodplan::planner {

enum class ScenarioKind { baseline, capture, intervention };

/// Identifies one solver run. Text form (used in file names and URLs):
///   baseline-rp10
///   capture-t17-f1-rp10
///   intervention-<set id>-rp10
struct ScenarioKey {
  ScenarioKind kind = ScenarioKind::baseline;
  int tile_id = 0;
  double fraction = 1.0;
  std::string intervention_set;
  double return_period = 0.0;

  std::string to_string() const;
  static ScenarioKey parse(const std::string& text);

  auto operator<=>(const ScenarioKey&) const = default;
  bool operator==(const ScenarioKey&) const = default;
};

ScenarioKey baseline_key(double rp);
ScenarioKey capture_key(int tile_id, double fraction, double rp);
ScenarioKey intervention_key(const std::string& set_id, double rp);

/// Unit rates for building interventions (GBP, 2022 price base).
struct CostModel {
  double pavement_install_per_m2 = 30.0;
  double pavement_annual_per_m2 = 0.40;
  double pavement_life_years = 40.0;
  double pond_install_gbp = 80'000.0;
  double pond_install_per_m3 = 5'000.0;  // GBP pond_install_gbp per this many m^3
  double pond_annual_per_m2 = 0.60;
  double pond_life_years = 15.0;

  double pond_rate_per_m3() const noexcept { return pond_install_gbp / pond_install_per_m3; }
};

struct CostReport {
  std::string intervention_id;
  InterventionType type = InterventionType::permeable_pavement;
  double area_m2 = 0.0;
  double volume_m3 = 0.0;
  double installation = 0.0;
  double annual_operation = 0.0;
  double lifetime_years = 0.0;
  bool buildable = true;
  std::string note;
  std::map<double, double> benefit;                     // per return period
  std::map<double, double> benefit_minus_installation;  // per return period
};

/// Installation/operation cost of one feature. Rain capture is not a
/// buildable feature and yields a zero-cost report flagged unbuildable.
CostReport cost_intervention(const InterventionSpec& spec, const CostModel& rates);

/// base.total - variant.total; negative when the variant floods more.
/// Throws UsageError when the return periods differ.
double benefit(const damage::ScenarioDamages& base, const damage::ScenarioDamages& variant);

struct TileBenefit {
  int tile_id = 0;
  double benefit = 0.0;  // GBP
  double green_fraction = 0.0;
  damage::ScenarioDamages variant;  // optional context for reports
};

struct RankingRow {
  int rank = 0;
  int tile_id = 0;
  double benefit = 0.0;
  double green_fraction = 0.0;
  double score = 0.0;  // benefit in GBP million x green fraction
  double variant_commercial = 0.0;
  double variant_residential = 0.0;
  double variant_total = 0.0;
};

struct TileRanking {
  double return_period = 0.0;
  double capture_fraction = 1.0;
  std::vector<RankingRow> rows;  // rank order
};

/// Sorts by score descending; ties by larger benefit, then lower tile id.
TileRanking rank_tiles(std::span<const TileBenefit> benefits, double return_period = 0.0,
                       double capture_fraction = 1.0);

/// Advisory: ponds where the green fraction reaches the threshold
/// (inclusive), permeable pavement otherwise.
InterventionType suggest_intervention(const RankingRow& row, double gf_threshold);

/// Expected annual damage by trapezoidal integration over exceedance
/// probability 1/rp. An extension for roll-ups; rankings stay per storm.
double expected_annual_damage(std::span<const std::pair<double, double>> rp_and_damage);

/// Everything shared by all scenario runs of one study.
struct Study {
  TerrainGrid grid;  // building holes already cut
  std::vector<geo::BuildingFootprint> buildings;
  geo::LandUseMap landuse;
  geo::TilePartition partition;  // green_fraction filled
  storm::RainRedirection redirection;
  hydro::SurfaceParams surface;
  hydro::SurfaceProperties props;
  hydro::SolverSettings solver;
  std::vector<storm::Hyetograph> storms;
  damage::DamageCurves curves;
  CostModel costs;
  double gf_threshold = 0.5;
  std::vector<std::string> warnings;

  const storm::Hyetograph& storm_for(double rp) const;
  std::vector<double> return_periods() const;
};

struct InterventionSet {
  std::string id;
  int version = 0;
  std::vector<InterventionSpec> specs;
};

struct ScenarioResult {
  ScenarioKey key;
  std::string content_hash;
  std::shared_ptr<const hydro::MaxDepthRaster> max_depth;
  hydro::VolumeLedger ledger;
  std::size_t steps = 0;
  std::vector<exposure::ExposureRecord> exposure;
  damage::ScenarioDamages damages;
  bool reused = false;
};

struct MatrixResult {
  std::map<ScenarioKey, damage::ScenarioDamages> damages;
  std::map<ScenarioKey, hydro::VolumeLedger> ledgers;
  std::map<ScenarioKey, std::string> failures;
  std::size_t solver_runs = 0;
};

struct InterventionEvaluation {
  double return_period = 0.0;
  damage::ScenarioDamages baseline;
  damage::ScenarioDamages damages;
  double benefit = 0.0;
  std::vector<CostReport> costs;
  double installation_total = 0.0;
  double area_total = 0.0;
};

/// Resolves scenario keys into solver inputs, reuses registry artifacts by
/// content hash and runs the rest on a bounded worker pool. Safe to call
/// from several threads.
class Planner {
 public:
  Planner(const Study& study, RunRegistry& registry);

  const Study& study() const noexcept { return study_; }
  RunRegistry& registry() noexcept { return registry_; }

  /// Content hash of the hydrodynamic inputs behind a key.
  std::string content_hash(const ScenarioKey& key) const;

  ScenarioResult run(const ScenarioKey& key, const hydro::ProgressFn& progress = {});

  /// Loads a stored result without running the solver; nullopt if absent.
  std::optional<ScenarioResult> lookup(const ScenarioKey& key) const;

  MatrixResult run_keys(const std::vector<ScenarioKey>& keys, unsigned workers,
                        const std::function<void(const ScenarioKey&, bool ok)>& on_done = {});

  /// Baselines for every rp plus one capture run per (tile, rp).
  MatrixResult run_matrix(std::span<const double> rps, std::span<const int> tiles,
                          double fraction, unsigned workers);

  TileRanking rank(double rp, double fraction, const MatrixResult& matrix) const;

  std::vector<InterventionEvaluation> evaluate_intervention(const InterventionSet& set,
                                                            std::span<const double> rps,
                                                            unsigned workers);

  std::size_t solver_invocations() const noexcept { return solver_invocations_.load(); }

 private:
  struct Inputs {
    const TerrainGrid* grid;
    const hydro::SurfaceProperties* props;
    std::optional<hydro::ModifiedDomain> modified;
    std::vector<double> weights;
    const storm::Hyetograph* storm;
  };
  Inputs resolve(const ScenarioKey& key) const;
  std::string hash_inputs(const Inputs& in) const;
  ScenarioResult finish(const ScenarioKey& key, std::string hash,
                        std::shared_ptr<const hydro::MaxDepthRaster> raster,
                        const hydro::VolumeLedger& ledger, std::size_t steps, bool reused) const;

  const Study& study_;
  RunRegistry& registry_;
  std::atomic<std::size_t> solver_invocations_{0};
};

std::vector<int> all_tile_ids(const geo::TilePartition& partition);

}  // namespace floodplan::planner
