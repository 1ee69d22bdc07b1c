#pragma once

#include "graph_model.hpp"

#include <memory>
#include <string>

namespace tgforge {

struct ServiceOptions {
  // Directory served at "/"; empty serves a small built-in landing page.
  std::string web_root;
  // Progress events are published every this many iterations.
  int snapshot_every = 5;
  unsigned threads = 1;
};

/// Single-graph HTTP/JSON service backing the browser viewer.
///
///   GET  /api/graph                  graph document
///   POST /api/layout                 start a layout job (202, 409 if one is active)
///   GET  /api/layout/{id}            job status, plus the result once finished
///   GET  /api/layout/{id}/events     text/event-stream of progress snapshots
///   POST /api/layout/{id}/stop       stop a job, keeping the latest positions
///   POST /api/filter                 apply a FilterSpec, returns visible ids
///   GET  /api/node/{id}              node details and neighbours
///
/// Errors are {"error": {"code", "message"}} with 4xx statuses.
class ViewerService {
public:
  ViewerService(std::shared_ptr<const TheoryGraph> graph, ServiceOptions options = {});
  ~ViewerService();

  ViewerService(const ViewerService &) = delete;
  ViewerService &operator=(const ViewerService &) = delete;

  /// Throws Error(Io) when the address cannot be bound. Port 0 picks a free port.
  void bind(const std::string &host, int port);
  int port() const;

  /// Serves until stop() is called from another thread.
  void run();
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace tgforge
