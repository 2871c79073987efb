#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "floodplan/planner.hpp"
#include "floodplan/project.hpp"

namespace floodplan::service {

enum class JobState { queued, running, done, failed };
const char* to_string(JobState s) noexcept;

struct RunJob {
  std::string id;
  std::vector<std::string> keys;
  JobState state = JobState::queued;
  double progress = 0.0;
  std::map<std::string, std::string> artifacts;  // key -> content hash
  std::map<std::string, std::string> errors;     // key -> message
  std::size_t restarts = 0;
};

nlohmann::json job_to_json(const RunJob& job);
RunJob job_from_json(const nlohmann::json& j);

struct Options {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 binds an ephemeral port
  unsigned workers = 1;
  std::size_t queue_capacity = 256;
};

/// A plain (status, content type, body) reply, independent of the HTTP
/// library so that handlers can be exercised without sockets.
struct Reply {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

/// HTTP front end over one project. Runs are asynchronous jobs drained by a
/// bounded FIFO worker pool; jobs are persisted under <registry>/jobs and
/// resumed after a restart.
class Service {
 public:
  Service(ProjectConfig config, Options options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Dispatches one request. `path` excludes the query string.
  Reply handle(const std::string& method, const std::string& path,
               const std::map<std::string, std::string>& query, const std::string& body);

  /// Binds the listening socket; returns the bound port.
  int bind();
  /// Serves until stop() is called.
  void serve();
  void stop();

  /// Blocks until the job has finished; false on timeout.
  bool wait_for(const std::string& job_id, double timeout_s);

  planner::Planner& planner();
  const planner::Study& study() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace floodplan::service
