#pragma once

#include <condition_variable>
#include <cstdint>
#include <string_view>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "floodplan/hydro.hpp"
#include "floodplan/planner.hpp"

namespace floodplan {

struct StoredRun {
  std::string content_hash;
  std::string key;
  std::shared_ptr<const hydro::MaxDepthRaster> max_depth;
  hydro::VolumeLedger ledger;
  std::size_t steps = 0;
};

/// On-disk store of completed solver runs keyed by content hash:
///
///   <dir>/index.json                 {"schema_version", "runs", "keys"}
///   <dir>/runs/<hash>/max_depth.bin  binary raster
///   <dir>/runs/<hash>/ledger.json
///   <dir>/interventions.json         versioned intervention sets
///
/// A run becomes visible (index entry written) only after its artifacts are
/// on disk, and only runs whose ledger closed are ever stored. An empty
/// directory path gives a purely in-memory registry.
class RunRegistry {
 public:
  explicit RunRegistry(std::filesystem::path dir = {});

  const std::filesystem::path& directory() const noexcept { return dir_; }

  bool contains(const std::string& hash) const;
  std::optional<StoredRun> find(const std::string& hash) const;
  void store(const std::string& hash, const std::string& key, const hydro::RunResult& result);
  std::optional<std::string> hash_for_key(const std::string& key) const;
  /// Points `key` at an already stored run with identical inputs.
  void link_key(const std::string& key, const std::string& hash);
  std::vector<std::string> keys() const;

  /// Claims `hash` for computation. Returns false (after waiting for the
  /// other worker) when the run was produced concurrently.
  bool begin_compute(const std::string& hash);
  void end_compute(const std::string& hash);

  std::vector<planner::InterventionSet> intervention_sets() const;
  std::optional<planner::InterventionSet> intervention_set(const std::string& id) const;
  /// Creates or replaces a set. When `expected_version` is given it must
  /// equal the stored version (0 for a new set), otherwise Conflict.
  planner::InterventionSet put_intervention_set(const std::string& id,
                                                std::vector<InterventionSpec> specs,
                                                std::optional<int> expected_version = {});

 private:
  void write_index_locked() const;
  void write_sets_locked() const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::string, nlohmann::json> index_;   // hash -> entry
  std::map<std::string, std::string> key_to_hash_;
  mutable std::map<std::string, StoredRun> cache_;
  std::set<std::string> in_flight_;
  std::map<std::string, planner::InterventionSet> sets_;
};

/// Writes `contents` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

/// Incremental SHA-256 (OpenSSL EVP backend).
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(const void* data, std::size_t size);
  Sha256& update(std::string_view text) { return update(text.data(), text.size()); }
  template <typename T>
  Sha256& update_values(const std::vector<T>& values) {
    const std::uint64_t n = values.size();
    update(&n, sizeof n);
    return update(values.data(), values.size() * sizeof(T));
  }
  std::string hex_digest();

 private:
  void* ctx_;
};

std::string sha256_hex(std::string_view bytes);

}  // namespace floodplan
