#include "floodplan/registry.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "floodplan/error.hpp"
#include "floodplan/raster_io.hpp"
#include "floodplan/reports.hpp"

namespace floodplan {

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
  if (!ctx_ || EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr) != 1)
    throw Error("cannot initialise SHA-256");
}

Sha256::~Sha256() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

Sha256& Sha256::update(const void* data, std::size_t size) {
  EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data, size);
  return *this;
}

std::string Sha256::hex_digest() {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), md, &len);
  std::ostringstream out;
  for (unsigned i = 0; i < len; ++i)
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return out.str();
}

std::string sha256_hex(std::string_view bytes) { return Sha256().update(bytes).hex_digest(); }

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::ostringstream tmp_name;
  tmp_name << path.filename().string() << ".tmp." << std::this_thread::get_id();
  const auto tmp = path.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

RunRegistry::RunRegistry(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (dir_.empty()) return;
  std::filesystem::create_directories(dir_ / "runs");
  const auto index_path = dir_ / "index.json";
  if (std::filesystem::exists(index_path)) {
    const auto doc = nlohmann::json::parse(read_file(index_path));
    for (const auto& [hash, entry] : doc.at("runs").items()) {
      // Skip entries whose artifacts vanished.
      if (std::filesystem::exists(dir_ / "runs" / hash / "max_depth.bin")) index_[hash] = entry;
    }
    const auto keys = doc.value("keys", nlohmann::json::object());
    for (const auto& [key, hash] : keys.items())
      if (index_.count(hash.get<std::string>())) key_to_hash_[key] = hash.get<std::string>();
  }
  const auto sets_path = dir_ / "interventions.json";
  if (std::filesystem::exists(sets_path)) {
    const auto doc = nlohmann::json::parse(read_file(sets_path));
    for (const auto& s : doc.at("sets")) {
      planner::InterventionSet set;
      set.id = s.at("id").get<std::string>();
      set.version = s.at("version").get<int>();
      for (const auto& spec : s.at("specs")) set.specs.push_back(intervention_from_json(spec));
      sets_[set.id] = std::move(set);
    }
  }
}

bool RunRegistry::contains(const std::string& hash) const {
  std::lock_guard lock(mu_);
  return index_.count(hash) > 0;
}

std::optional<StoredRun> RunRegistry::find(const std::string& hash) const {
  std::lock_guard lock(mu_);
  if (auto it = cache_.find(hash); it != cache_.end()) return it->second;
  auto it = index_.find(hash);
  if (it == index_.end() || dir_.empty()) return std::nullopt;

  const auto run_dir = dir_ / "runs" / hash;
  std::istringstream raster_in(read_file(run_dir / "max_depth.bin"));
  RasterBand band = read_binary_raster(raster_in);
  const auto ledger_doc = nlohmann::json::parse(read_file(run_dir / "ledger.json"));

  auto raster = std::make_shared<hydro::MaxDepthRaster>();
  raster->geo = band.geo;
  raster->depth = std::move(band.values);
  raster->scenario_id = it->second.value("key", "");
  raster->end_time = ledger_doc.value("end_time_s", 0.0);

  StoredRun run;
  run.content_hash = hash;
  run.key = raster->scenario_id;
  run.max_depth = std::move(raster);
  run.ledger = report::ledger_from_json(ledger_doc.at("ledger"));
  run.steps = ledger_doc.value("steps", std::size_t{0});
  cache_[hash] = run;
  return run;
}

void RunRegistry::store(const std::string& hash, const std::string& key,
                        const hydro::RunResult& result) {
  nlohmann::json ledger_doc{{"schema_version", report::kSchemaVersion},
                            {"key", key},
                            {"content_hash", hash},
                            {"steps", result.steps},
                            {"end_time_s", result.max_depth.end_time},
                            {"ledger", report::ledger_to_json(result.ledger)}};
  if (!dir_.empty()) {
    const auto run_dir = dir_ / "runs" / hash;
    std::filesystem::create_directories(run_dir);
    write_file_atomic(run_dir / "max_depth.bin",
                      encode_binary_raster(result.max_depth.geo, result.max_depth.depth));
    write_file_atomic(run_dir / "ledger.json", ledger_doc.dump(2));
  }

  StoredRun run;
  run.content_hash = hash;
  run.key = key;
  auto raster = std::make_shared<hydro::MaxDepthRaster>(result.max_depth);
  raster->scenario_id = key;
  run.max_depth = std::move(raster);
  run.ledger = result.ledger;
  run.steps = result.steps;

  std::lock_guard lock(mu_);
  cache_[hash] = std::move(run);
  index_[hash] = {{"key", key}, {"steps", result.steps}};
  key_to_hash_[key] = hash;
  write_index_locked();
}

std::optional<std::string> RunRegistry::hash_for_key(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = key_to_hash_.find(key);
  if (it == key_to_hash_.end()) return std::nullopt;
  return it->second;
}

void RunRegistry::link_key(const std::string& key, const std::string& hash) {
  std::lock_guard lock(mu_);
  if (!index_.count(hash)) throw NotFound("no stored run with hash " + hash);
  auto it = key_to_hash_.find(key);
  if (it != key_to_hash_.end() && it->second == hash) return;
  key_to_hash_[key] = hash;
  write_index_locked();
}

std::vector<std::string> RunRegistry::keys() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [k, h] : key_to_hash_) out.push_back(k);
  return out;
}

bool RunRegistry::begin_compute(const std::string& hash) {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return !in_flight_.count(hash); });
  if (index_.count(hash)) return false;
  in_flight_.insert(hash);
  return true;
}

void RunRegistry::end_compute(const std::string& hash) {
  {
    std::lock_guard lock(mu_);
    in_flight_.erase(hash);
  }
  cv_.notify_all();
}

void RunRegistry::write_index_locked() const {
  if (dir_.empty()) return;
  nlohmann::json runs = nlohmann::json::object();
  for (const auto& [hash, entry] : index_) runs[hash] = entry;
  nlohmann::json keys = nlohmann::json::object();
  for (const auto& [k, h] : key_to_hash_) keys[k] = h;
  nlohmann::json doc{{"schema_version", report::kSchemaVersion}, {"runs", runs}, {"keys", keys}};
  write_file_atomic(dir_ / "index.json", doc.dump(2));
}

std::vector<planner::InterventionSet> RunRegistry::intervention_sets() const {
  std::lock_guard lock(mu_);
  std::vector<planner::InterventionSet> out;
  for (const auto& [id, s] : sets_) out.push_back(s);
  return out;
}

std::optional<planner::InterventionSet> RunRegistry::intervention_set(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sets_.find(id);
  if (it == sets_.end()) return std::nullopt;
  return it->second;
}

planner::InterventionSet RunRegistry::put_intervention_set(const std::string& id,
                                                           std::vector<InterventionSpec> specs,
                                                           std::optional<int> expected_version) {
  if (id.empty()) throw UsageError("intervention set id must not be empty");
  std::lock_guard lock(mu_);
  auto it = sets_.find(id);
  const int current = it == sets_.end() ? 0 : it->second.version;
  if (expected_version && *expected_version != current)
    throw Conflict("intervention set '" + id + "' is at version " + std::to_string(current) +
                   ", expected " + std::to_string(*expected_version));
  planner::InterventionSet set{id, current + 1, std::move(specs)};
  sets_[id] = set;
  write_sets_locked();
  return set;
}

void RunRegistry::write_sets_locked() const {
  if (dir_.empty()) return;
  nlohmann::json sets = nlohmann::json::array();
  for (const auto& [id, s] : sets_) {
    nlohmann::json specs = nlohmann::json::array();
    for (const auto& spec : s.specs) specs.push_back(intervention_to_json(spec));
    sets.push_back({{"id", id}, {"version", s.version}, {"specs", specs}});
  }
  write_file_atomic(dir_ / "interventions.json",
                    nlohmann::json{{"schema_version", report::kSchemaVersion}, {"sets", sets}}.dump(2));
}

}  // namespace floodplan
