#include "viewer_service.hpp"

#include "error.hpp"
#include "formats.hpp"
#include "graph_ops.hpp"
#include "layout.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

namespace tgforge {

using json = nlohmann::json;

namespace {

constexpr const char *kJson = "application/json; charset=utf-8";

constexpr const char *kLandingPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>tgforge</title></head>
<body>
<h1>tgforge viewer service</h1>
<p>No viewer assets are installed. Start the server with <code>--web-root DIR</code> to serve them.</p>
<ul>
<li><a href="/api/graph">GET /api/graph</a></li>
<li>POST /api/layout, GET /api/layout/{id}, GET /api/layout/{id}/events, POST /api/layout/{id}/stop</li>
<li>POST /api/filter</li>
<li>GET /api/node/{id}</li>
</ul>
</body></html>
)";

enum class JobState { Pending, Running, Converged, Stopped, Failed };

const char *to_string(JobState s) {
  switch (s) {
  case JobState::Pending: return "pending";
  case JobState::Running: return "running";
  case JobState::Converged: return "converged";
  case JobState::Stopped: return "stopped";
  case JobState::Failed: return "failed";
  }
  return "failed";
}

bool is_terminal(JobState s) {
  return s == JobState::Converged || s == JobState::Stopped || s == JobState::Failed;
}

void send_error(httplib::Response &res, int status, const std::string &code,
                const std::string &message, const std::string &field = {}) {
  json body = {{"error", {{"code", code}, {"message", message}}}};
  if (!field.empty()) body["error"]["field"] = field;
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response &res, int status, const Error &e) {
  send_error(res, status, to_string(e.code()), e.what(), e.offending_id());
}

json rounded_positions(const TheoryGraph &graph, std::span<const Vec3> positions) {
  json out = json::object();
  for (NodeIndex n = 0; n < graph.node_count(); ++n) {
    const Vec3 &p = positions[n];
    out[graph.node(n).id] = {round_significant(p.x, 6), round_significant(p.y, 6),
                             round_significant(p.z, 6)};
  }
  return out;
}

struct LayoutJob {
  std::string id;
  LayoutParams params;

  std::mutex mutex;
  std::condition_variable changed;
  JobState state = JobState::Pending;
  int iteration = 0;
  double max_displacement = 0.0;
  double mean_edge_length = 0.0;
  // Latest published event; seq counts publications.
  std::uint64_t seq = 0;
  std::string event;
  std::optional<Layout> result;
  std::string failure;

  std::stop_source stop;
  std::jthread worker;
};

} // namespace

struct ViewerService::Impl {
  std::shared_ptr<const TheoryGraph> graph;
  ServiceOptions options;
  httplib::Server server;
  int bound_port = -1;
  std::atomic<bool> shutting_down{false};

  std::mutex session_mutex;
  FilterSpec filter;
  std::optional<Layout> current_layout;
  std::map<std::string, std::shared_ptr<LayoutJob>> jobs;
  std::shared_ptr<LayoutJob> active;
  std::uint64_t next_job = 1;

  Impl(std::shared_ptr<const TheoryGraph> g, ServiceOptions o)
      : graph(std::move(g)), options(std::move(o)) {
    if (options.snapshot_every < 1) options.snapshot_every = 1;
    routes();
  }

  ~Impl() {
    shutting_down = true;
    std::vector<std::shared_ptr<LayoutJob>> all;
    {
      std::lock_guard lock(session_mutex);
      for (auto &[id, job] : jobs) all.push_back(job);
    }
    for (auto &job : all) {
      job->stop.request_stop();
      job->changed.notify_all();
    }
    server.stop();
    for (auto &job : all)
      if (job->worker.joinable()) job->worker.join();
  }

  std::shared_ptr<LayoutJob> find_job(const std::string &id) {
    std::lock_guard lock(session_mutex);
    auto it = jobs.find(id);
    return it == jobs.end() ? nullptr : it->second;
  }

  json status_json(LayoutJob &job) {
    std::lock_guard lock(job.mutex);
    json s = {{"id", job.id},
              {"state", to_string(job.state)},
              {"iteration", job.iteration},
              {"maxDisplacement", job.max_displacement},
              {"meanEdgeLength", job.mean_edge_length},
              {"params", params_to_json(job.params)}};
    if (job.result) {
      s["converged"] = job.result->converged;
      s["result"] = json::parse(serialize_layout(*graph, *job.result, &job.params));
    }
    if (job.state == JobState::Failed) s["error"] = job.failure;
    return s;
  }

  // Caller holds job.mutex.
  void publish(LayoutJob &job, const char *type, json payload) {
    payload["jobId"] = job.id;
    payload["state"] = to_string(job.state);
    job.event = std::string("event: ") + type + "\ndata: " + payload.dump() + "\n\n";
    ++job.seq;
    job.changed.notify_all();
  }

  void run_job(const std::shared_ptr<LayoutJob> &job) {
    {
      std::lock_guard lock(job->mutex);
      job->state = JobState::Running;
    }
    RunOptions run;
    run.stop = job->stop.get_token();
    run.threads = options.threads;
    run.on_progress = [this, &job](const LayoutProgress &p) {
      std::lock_guard lock(job->mutex);
      job->iteration = p.iteration;
      job->max_displacement = p.max_displacement;
      job->mean_edge_length = p.mean_edge_length;
      if (p.iteration % options.snapshot_every == 0) {
        publish(*job, "progress",
                {{"iteration", p.iteration},
                 {"maxDisplacement", p.max_displacement},
                 {"meanEdgeLength", p.mean_edge_length},
                 {"positions", rounded_positions(*graph, p.positions)}});
      }
    };

    std::optional<Layout> result;
    std::string failure;
    try {
      result = LayoutEngine(*graph, job->params, options.threads).run(run);
    } catch (const std::exception &e) {
      failure = e.what();
    }

    if (result) {
      std::lock_guard lock(session_mutex);
      current_layout = *result;
    }
    std::lock_guard lock(job->mutex);
    if (!result) {
      job->state = JobState::Failed;
      job->failure = failure;
      publish(*job, "terminal", {{"iteration", job->iteration}, {"error", failure}});
    } else {
      job->state = result->converged ? JobState::Converged : JobState::Stopped;
      job->iteration = result->iterations_run;
      job->max_displacement = result->final_max_displacement;
      job->mean_edge_length = mean_edge_length(*graph, result->positions);
      job->result = std::move(result);
      publish(*job, "terminal",
              {{"iteration", job->iteration},
               {"maxDisplacement", job->max_displacement},
               {"meanEdgeLength", job->mean_edge_length},
               {"converged", job->result->converged},
               {"reason", job->result->converged
                              ? "converged"
                              : (job->stop.stop_requested() ? "requested" : "max_iterations")},
               {"positions", rounded_positions(*graph, job->result->positions)}});
    }
  }

  void routes() {
    server.Get("/api/graph", [this](const httplib::Request &, httplib::Response &res) {
      res.set_content(serialize_graph(*graph), kJson);
    });

    server.Post("/api/layout", [this](const httplib::Request &req, httplib::Response &res) {
      LayoutParams params;
      try {
        json body = req.body.empty() ? json::object() : json::parse(req.body);
        params = params_from_json(body);
      } catch (const json::exception &e) {
        return send_error(res, 400, "invalid_params", e.what());
      } catch (const Error &e) {
        return send_error(res, 400, "invalid_params", e.what(), e.offending_id());
      }

      std::lock_guard lock(session_mutex);
      if (active) {
        std::lock_guard job_lock(active->mutex);
        if (!is_terminal(active->state))
          return send_error(res, 409, "job_active", "layout job " + active->id + " is still running");
      }
      auto job = std::make_shared<LayoutJob>();
      job->id = "job-" + std::to_string(next_job++);
      job->params = params;
      jobs[job->id] = job;
      active = job;
      job->worker = std::jthread([this, job] { run_job(job); });
      res.status = 202;
      res.set_content(json{{"id", job->id}, {"state", "pending"}}.dump(), kJson);
    });

    server.Get(R"(/api/layout/([^/]+))", [this](const httplib::Request &req, httplib::Response &res) {
      auto job = find_job(req.matches[1]);
      if (!job) return send_error(res, 404, "unknown_job", "no layout job '" + std::string(req.matches[1]) + "'");
      res.set_content(status_json(*job).dump(), kJson);
    });

    server.Post(R"(/api/layout/([^/]+)/stop)",
                [this](const httplib::Request &req, httplib::Response &res) {
                  auto job = find_job(req.matches[1]);
                  if (!job)
                    return send_error(res, 404, "unknown_job",
                                      "no layout job '" + std::string(req.matches[1]) + "'");
                  job->stop.request_stop();
                  if (job->worker.joinable() && job->worker.get_id() != std::this_thread::get_id()) {
                    // Wait for the worker to publish its terminal state.
                    std::unique_lock lock(job->mutex);
                    job->changed.wait(lock, [&] { return is_terminal(job->state); });
                  }
                  res.set_content(status_json(*job).dump(), kJson);
                });

    server.Get(R"(/api/layout/([^/]+)/events)",
               [this](const httplib::Request &req, httplib::Response &res) {
                 auto job = find_job(req.matches[1]);
                 if (!job)
                   return send_error(res, 404, "unknown_job",
                                     "no layout job '" + std::string(req.matches[1]) + "'");
                 res.set_header("Cache-Control", "no-cache");
                 auto last_seen = std::make_shared<std::uint64_t>(0);
                 res.set_chunked_content_provider(
                     "text/event-stream",
                     [this, job, last_seen](std::size_t, httplib::DataSink &sink) {
                       std::unique_lock lock(job->mutex);
                       job->changed.wait_for(lock, std::chrono::milliseconds(200), [&] {
                         return job->seq > *last_seen || is_terminal(job->state) ||
                                shutting_down.load();
                       });
                       if (shutting_down) {
                         sink.done();
                         return true;
                       }
                       if (is_terminal(job->state)) {
                         const std::string event = job->event;
                         lock.unlock();
                         sink.write(event.data(), event.size());
                         sink.done();
                         return true;
                       }
                       if (job->seq > *last_seen) {
                         *last_seen = job->seq;
                         const std::string event = job->event;
                         lock.unlock();
                         return sink.write(event.data(), event.size());
                       }
                       return sink.is_writable();
                     });
               });

    server.Post("/api/filter", [this](const httplib::Request &req, httplib::Response &res) {
      try {
        FilterSpec spec = parse_filter_spec(req.body.empty() ? "{}" : req.body);
        std::lock_guard lock(session_mutex);
        const VisibleSubgraph visible =
            apply_filter(*graph, spec, current_layout ? &*current_layout : nullptr);
        filter = std::move(spec);
        res.set_content(to_json(*graph, visible), kJson);
      } catch (const Error &e) {
        send_error(res, 400, e);
      }
    });

    server.Get(R"(/api/node/(.+))", [this](const httplib::Request &req, httplib::Response &res) {
      const std::string id = req.matches[1];
      auto n = graph->find_node(id);
      if (!n) return send_error(res, 404, "unknown_node", "no node '" + id + "'", id);
      const GraphNode &node = graph->node(*n);
      json neighbors = json::array();
      for (EdgeIndex e : graph->in_edges(*n)) {
        const GraphEdge &edge = graph->edge(e);
        neighbors.push_back({{"nodeId", graph->node(edge.source).id},
                             {"edgeId", edge.id},
                             {"edgeKind", graph->kind_of(edge).name},
                             {"direction", "incoming"}});
      }
      for (EdgeIndex e : graph->out_edges(*n)) {
        const GraphEdge &edge = graph->edge(e);
        neighbors.push_back({{"nodeId", graph->node(edge.target).id},
                             {"edgeId", edge.id},
                             {"edgeKind", graph->kind_of(edge).name},
                             {"direction", "outgoing"}});
      }
      json body = {{"id", node.id},
                   {"label", node.label},
                   {"uri", node.uri},
                   {"detailsUrl", node.details_url ? json(*node.details_url) : json(nullptr)},
                   {"neighbors", std::move(neighbors)}};
      res.set_content(body.dump(), kJson);
    });

    if (options.web_root.empty()) {
      server.Get("/", [](const httplib::Request &, httplib::Response &res) {
        res.set_content(kLandingPage, "text/html; charset=utf-8");
      });
    }
  }
};

ViewerService::ViewerService(std::shared_ptr<const TheoryGraph> graph, ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(graph), std::move(options))) {
  if (!impl_->graph) throw Error(ErrorCode::Input, "viewer service needs a graph");
  if (!impl_->options.web_root.empty() &&
      !impl_->server.set_mount_point("/", impl_->options.web_root))
    throw Error(ErrorCode::Io, "web root '" + impl_->options.web_root + "' is not a directory");
}

ViewerService::~ViewerService() = default;

void ViewerService::bind(const std::string &host, int port) {
  // httplib's default adds SO_REUSEPORT, which would let a second server
  // share a port that is already taken.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  if (port == 0) {
    impl_->bound_port = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    impl_->bound_port = port;
  } else {
    impl_->bound_port = -1;
  }
  if (impl_->bound_port < 0)
    throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
}

int ViewerService::port() const { return impl_->bound_port; }

void ViewerService::run() {
  if (impl_->bound_port < 0) throw Error(ErrorCode::Io, "viewer service is not bound");
  impl_->server.listen_after_bind();
}

void ViewerService::stop() {
  impl_->shutting_down = true;
  impl_->server.stop();
}

} // namespace tgforge
