#include "floodplan/service.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "floodplan/error.hpp"
#include "floodplan/png_render.hpp"
#include "floodplan/raster_io.hpp"
#include "floodplan/registry.hpp"
#include "floodplan/reports.hpp"

namespace floodplan::service {

namespace fs = std::filesystem;

const char* to_string(JobState s) noexcept {
  switch (s) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::failed: return "failed";
  }
  return "unknown";
}

namespace {

JobState parse_state(const std::string& s) {
  if (s == "queued") return JobState::queued;
  if (s == "running") return JobState::running;
  if (s == "done") return JobState::done;
  if (s == "failed") return JobState::failed;
  throw ParseError("unknown job state '" + s + "'");
}

Reply json_reply(int status, const nlohmann::json& j) { return {status, "application/json", j.dump(2), {}}; }

Reply error_reply(int status, const std::string& stage, const std::exception& e) {
  return json_reply(status, report::error_to_json(stage, e));
}

int status_for(const std::exception& e) {
  if (dynamic_cast<const NotFound*>(&e)) return 404;
  if (dynamic_cast<const Conflict*>(&e)) return 409;
  if (dynamic_cast<const GeometryError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
      dynamic_cast<const DomainError*>(&e))
    return 422;
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const nlohmann::json::exception*>(&e))
    return 400;
  return 500;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

std::string query_value(const std::map<std::string, std::string>& q, const std::string& name) {
  auto it = q.find(name);
  if (it == q.end() || it->second.empty()) throw UsageError("missing query parameter '" + name + "'");
  return it->second;
}

double query_number(const std::map<std::string, std::string>& q, const std::string& name,
                    std::optional<double> fallback = {}) {
  auto it = q.find(name);
  if (it == q.end() || it->second.empty()) {
    if (fallback) return *fallback;
    throw UsageError("missing query parameter '" + name + "'");
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != it->second.size()) throw UsageError("query parameter '" + name + "' is not a number");
  return v;
}

}  // namespace

nlohmann::json job_to_json(const RunJob& job) {
  return {{"schema_version", report::kSchemaVersion},
          {"id", job.id},
          {"keys", job.keys},
          {"state", to_string(job.state)},
          {"progress", job.progress},
          {"artifacts", job.artifacts},
          {"errors", job.errors},
          {"restarts", job.restarts}};
}

RunJob job_from_json(const nlohmann::json& j) {
  RunJob job;
  job.id = j.at("id").get<std::string>();
  job.keys = j.at("keys").get<std::vector<std::string>>();
  job.state = parse_state(j.at("state").get<std::string>());
  job.progress = j.value("progress", 0.0);
  job.artifacts = j.value("artifacts", std::map<std::string, std::string>{});
  job.errors = j.value("errors", std::map<std::string, std::string>{});
  job.restarts = j.value("restarts", std::size_t{0});
  return job;
}

struct Service::Impl {
  Impl(ProjectConfig cfg, Options opt)
      : config(std::move(cfg)),
        options(opt),
        study(build_study(config)),
        registry(config.registry),
        planner(study, registry),
        jobs_dir(config.registry / "jobs") {
    fs::create_directories(jobs_dir);
    restore_jobs();
    const unsigned n = std::max(1u, options.workers);
    for (unsigned i = 0; i < n; ++i) workers.emplace_back([this] { work(); });
  }

  ~Impl() {
    {
      std::lock_guard lock(mu);
      stopping = true;
    }
    cv.notify_all();
    for (auto& t : workers) t.join();
  }

  void persist_locked(const RunJob& job) {
    write_file_atomic(jobs_dir / (job.id + ".json"), job_to_json(job).dump(2));
  }

  // Jobs interrupted while queued or running are queued again in id order.
  void restore_jobs() {
    std::vector<RunJob> found;
    for (const auto& entry : fs::directory_iterator(jobs_dir)) {
      if (entry.path().extension() != ".json") continue;
      try {
        found.push_back(job_from_json(nlohmann::json::parse(read_file(entry.path()))));
      } catch (const std::exception&) {
        continue;  // a torn or foreign file; never produced by write_file_atomic
      }
    }
    std::sort(found.begin(), found.end(), [](const RunJob& a, const RunJob& b) {
      return job_number(a.id) < job_number(b.id);
    });
    std::lock_guard lock(mu);
    for (auto& job : found) {
      next_id = std::max(next_id, job_number(job.id) + 1);
      if (job.state == JobState::queued || job.state == JobState::running) {
        if (job.state == JobState::running) ++job.restarts;
        job.state = JobState::queued;
        job.progress = 0.0;
        persist_locked(job);
        queue.push_back(job.id);
      }
      jobs[job.id] = std::move(job);
    }
  }

  static std::size_t job_number(const std::string& id) {
    try {
      return id.rfind("job-", 0) == 0 ? std::stoul(id.substr(4)) : 0;
    } catch (const std::exception&) {
      return 0;
    }
  }

  void work() {
    while (true) {
      std::string id;
      std::vector<std::string> keys;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return stopping || !queue.empty(); });
        if (stopping) return;
        id = queue.front();
        queue.pop_front();
        RunJob& job = jobs.at(id);
        job.state = JobState::running;
        keys = job.keys;
        persist_locked(job);
      }
      const double n = static_cast<double>(keys.size());
      std::map<std::string, std::string> artifacts, errors;
      for (std::size_t k = 0; k < keys.size(); ++k) {
        auto progress = [&, k](double f) {
          std::lock_guard lock(mu);
          jobs.at(id).progress = (static_cast<double>(k) + f) / n;
        };
        try {
          const auto result = planner.run(planner::ScenarioKey::parse(keys[k]), progress);
          artifacts[keys[k]] = result.content_hash;
        } catch (const std::exception& e) {
          errors[keys[k]] = e.what();
        }
      }
      {
        std::lock_guard lock(mu);
        RunJob& job = jobs.at(id);
        job.artifacts = std::move(artifacts);
        job.errors = std::move(errors);
        job.state = job.errors.empty() ? JobState::done : JobState::failed;
        job.progress = 1.0;
        persist_locked(job);
      }
      done_cv.notify_all();
    }
  }

  Reply submit(const std::string& body) {
    const auto doc = nlohmann::json::parse(body);
    const nlohmann::json& list = doc.is_array() ? doc : doc.at("keys");
    std::vector<std::string> keys;
    for (const auto& k : list) {
      const auto key = planner::ScenarioKey::parse(k.get<std::string>());
      planner.content_hash(key);  // resolves storms, tiles and intervention sets
      keys.push_back(key.to_string());
    }
    if (keys.empty()) throw UsageError("no scenario keys given");
    std::lock_guard lock(mu);
    if (queue.size() >= options.queue_capacity)
      return json_reply(503, {{"schema_version", report::kSchemaVersion},
                              {"status", "error"},
                              {"kind", "queue_full"},
                              {"message", "run queue is full"}});
    RunJob job;
    job.id = "job-" + std::to_string(next_id++);
    job.keys = std::move(keys);
    persist_locked(job);
    queue.push_back(job.id);
    auto j = job_to_json(job);
    jobs[job.id] = std::move(job);
    cv.notify_one();
    return json_reply(202, j);
  }

  planner::ScenarioResult result_for(const std::string& text) {
    const auto key = planner::ScenarioKey::parse(text);
    auto r = planner.lookup(key);
    if (!r) throw NotFound("no completed run for '" + key.to_string() + "'");
    return std::move(*r);
  }

  Reply depth(const std::string& key, const std::map<std::string, std::string>& query) {
    const auto r = result_for(key);
    const auto it = query.find("format");
    const std::string format = it == query.end() ? "bin" : it->second;
    const auto& raster = *r.max_depth;
    Reply reply;
    reply.headers["X-Georef"] = nlohmann::json{{"origin_x", raster.geo.origin_x},
                                               {"origin_y", raster.geo.origin_y},
                                               {"cell_size", raster.geo.cell_size},
                                               {"n_rows", raster.geo.n_rows},
                                               {"n_cols", raster.geo.n_cols}}
                                    .dump();
    if (format == "bin") {
      reply.content_type = "application/octet-stream";
      reply.body = encode_binary_raster(raster.geo, raster.depth);
    } else if (format == "png") {
      reply.content_type = "image/png";
      reply.body = render_depth_png(raster.geo, raster.depth);
    } else if (format == "asc") {
      reply.content_type = "text/plain";
      std::ostringstream out;
      write_esri_ascii(out, raster.geo, raster.depth);
      reply.body = out.str();
    } else {
      throw UsageError("unknown depth format '" + format + "' (bin, png or asc)");
    }
    return reply;
  }

  Reply ranking(const std::map<std::string, std::string>& query) {
    const double rp = query_number(query, "rp");
    const double fraction = query_number(query, "fraction", 1.0);
    planner::MatrixResult m;
    const auto base = planner.lookup(planner::baseline_key(rp));
    if (!base) throw NotFound("baseline for return period " + query_value(query, "rp") + " has not been run");
    m.damages[base->key] = base->damages;
    std::vector<int> missing;
    for (const auto& t : study.partition.tiles) {
      const auto key = planner::capture_key(t.id, fraction, rp);
      if (auto r = planner.lookup(key))
        m.damages[key] = r->damages;
      else
        missing.push_back(t.id);
    }
    auto j = report::ranking_to_json(planner.rank(rp, fraction, m), study.gf_threshold);
    j["missing_tiles"] = missing;
    return json_reply(200, j);
  }

  nlohmann::json set_json(const planner::InterventionSet& set) {
    nlohmann::json specs = nlohmann::json::array();
    nlohmann::json costs = nlohmann::json::array();
    double installation = 0.0, annual = 0.0;
    for (const auto& s : set.specs) {
      specs.push_back(intervention_to_json(s));
      const auto c = planner::cost_intervention(s, study.costs);
      installation += c.installation;
      annual += c.annual_operation;
      costs.push_back(report::cost_to_json(c));
    }
    nlohmann::json keys = nlohmann::json::object();
    for (double rp : study.return_periods())
      keys[report::fd_label(planner::intervention_key(set.id, rp))] =
          planner::intervention_key(set.id, rp).to_string();
    return {{"schema_version", report::kSchemaVersion},
            {"id", set.id},
            {"version", set.version},
            {"specs", std::move(specs)},
            {"costs", std::move(costs)},
            {"installation_total_gbp", installation},
            {"annual_operation_total_gbp", annual},
            {"keys", std::move(keys)}};
  }

  Reply put_interventions(const std::string& body) {
    const auto doc = nlohmann::json::parse(body);
    std::string id;
    std::vector<InterventionSpec> specs;
    std::optional<int> expected;
    try {
      if (doc.contains("type")) {
        specs.push_back(intervention_from_json(doc));
        id = doc.value("set", specs.back().id);
      } else {
        id = doc.at("id").get<std::string>();
        for (const auto& s : doc.at("specs")) specs.push_back(intervention_from_json(s));
      }
      if (doc.contains("expected_version")) expected = doc["expected_version"].get<int>();
      planner::intervention_key(id, 1.0);  // id syntax
      for (const auto& s : specs) {
        s.validate();
        if (s.type == InterventionType::rain_capture) study.partition.index_of(s.tile_id);
      }
      hydro::apply_interventions(study.grid, study.props, study.landuse, specs, study.surface);
    } catch (const NotFound& e) {
      throw GeometryError(e.what());
    }
    const auto set = registry.put_intervention_set(id, std::move(specs), expected);
    return json_reply(201, set_json(set));
  }

  Reply route(const std::string& method, const std::string& path,
              const std::map<std::string, std::string>& query, const std::string& body) {
    const auto parts = split_path(path);
    const auto n = parts.size();
    const bool get = method == "GET", post = method == "POST";
    if (get && n == 1 && parts[0] == "project")
      return json_reply(200, project_to_json(config, study));
    if (get && n == 1 && parts[0] == "tiles")
      return json_reply(200, report::tiles_geojson(study.partition));
    if (n >= 1 && parts[0] == "runs") {
      if (post && n == 1) return submit(body);
      if (get && n == 1) {
        std::lock_guard lock(mu);
        nlohmann::json list = nlohmann::json::array();
        for (const auto& [id, job] : jobs) list.push_back(job_to_json(job));
        return json_reply(200, {{"schema_version", report::kSchemaVersion}, {"jobs", list}});
      }
      if (get && n == 2) {
        std::lock_guard lock(mu);
        auto it = jobs.find(parts[1]);
        if (it == jobs.end()) throw NotFound("unknown job '" + parts[1] + "'");
        return json_reply(200, job_to_json(it->second));
      }
    }
    if (get && n == 3 && parts[0] == "results") {
      if (parts[2] == "depth") return depth(parts[1], query);
      const auto r = result_for(parts[1]);
      if (parts[2] == "exposure")
        return json_reply(200, report::exposure_geojson(r.exposure, study.buildings));
      if (parts[2] == "damages") return json_reply(200, report::damages_to_json(r.key, r.damages));
      if (parts[2] == "ledger")
        return json_reply(200, {{"schema_version", report::kSchemaVersion},
                                {"key", r.key.to_string()},
                                {"content_hash", r.content_hash},
                                {"steps", r.steps},
                                {"ledger", report::ledger_to_json(r.ledger)}});
    }
    if (get && n == 1 && parts[0] == "ranking") return ranking(query);
    if (n >= 1 && parts[0] == "interventions") {
      if (post && n == 1) return put_interventions(body);
      if (get && n == 1) {
        nlohmann::json list = nlohmann::json::array();
        for (const auto& s : registry.intervention_sets()) list.push_back(set_json(s));
        return json_reply(200, {{"schema_version", report::kSchemaVersion}, {"sets", list}});
      }
      if (get && n == 2) {
        const auto set = registry.intervention_set(parts[1]);
        if (!set) throw NotFound("unknown intervention set '" + parts[1] + "'");
        return json_reply(200, set_json(*set));
      }
    }
    if (get && n == 1 && parts[0] == "diff") {
      const auto base = result_for(query_value(query, "base"));
      const auto variant = result_for(query_value(query, "variant"));
      return json_reply(200, report::diff_to_json(base.key, base.damages, variant.key, variant.damages));
    }
    throw NotFound("no route for " + method + " " + path);
  }

  ProjectConfig config;
  Options options;
  planner::Study study;
  RunRegistry registry;
  planner::Planner planner;
  fs::path jobs_dir;
  httplib::Server server;

  std::mutex mu;
  std::condition_variable cv, done_cv;
  std::deque<std::string> queue;
  std::map<std::string, RunJob> jobs;
  std::size_t next_id = 1;
  bool stopping = false;
  std::vector<std::thread> workers;
};

Service::Service(ProjectConfig config, Options options)
    : impl_(std::make_unique<Impl>(std::move(config), options)) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    const Reply r = handle(req.method, req.path, query, req.body);
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_content(r.body, r.content_type);
  };
  impl_->server.Get(".*", handler);
  impl_->server.Post(".*", handler);
}

Service::~Service() {
  stop();
}

Reply Service::handle(const std::string& method, const std::string& path,
                      const std::map<std::string, std::string>& query, const std::string& body) {
  try {
    return impl_->route(method, path, query, body);
  } catch (const std::exception& e) {
    return error_reply(status_for(e), method + " " + path, e);
  }
}

int Service::bind() {
  auto& o = impl_->options;
  if (o.port == 0) return o.port = impl_->server.bind_to_any_port(o.host);
  if (!impl_->server.bind_to_port(o.host, o.port))
    throw Error("cannot bind " + o.host + ":" + std::to_string(o.port));
  return o.port;
}

void Service::serve() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

bool Service::wait_for(const std::string& job_id, double timeout_s) {
  std::unique_lock lock(impl_->mu);
  return impl_->done_cv.wait_for(lock, std::chrono::duration<double>(timeout_s), [&] {
    auto it = impl_->jobs.find(job_id);
    return it != impl_->jobs.end() &&
           (it->second.state == JobState::done || it->second.state == JobState::failed);
  });
}

planner::Planner& Service::planner() { return impl_->planner; }
const planner::Study& Service::study() const { return impl_->study; }

}  // namespace floodplan::service
