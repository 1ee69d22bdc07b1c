#include <tgforge/tgforge.h>

#include "error.hpp"
#include "formats.hpp"
#include "graph_model.hpp"
#include "graph_ops.hpp"
#include "layout.hpp"
#include "viewer_service.hpp"

#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>

struct tgf_graph {
  std::shared_ptr<const tgforge::TheoryGraph> graph;
};

struct tgf_layout {
  tgforge::Layout layout;
  std::optional<tgforge::LayoutParams> params;
};

struct tgf_server {
  std::unique_ptr<tgforge::ViewerService> service;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_error_id;

tgf_status status_of(tgforge::ErrorCode code) {
  using tgforge::ErrorCode;
  switch (code) {
  case ErrorCode::Parse: return TGF_ERR_PARSE;
  case ErrorCode::Schema: return TGF_ERR_SCHEMA;
  case ErrorCode::Reference: return TGF_ERR_REFERENCE;
  case ErrorCode::Duplicate: return TGF_ERR_DUPLICATE;
  case ErrorCode::SelfLoop: return TGF_ERR_SELF_LOOP;
  case ErrorCode::Input: return TGF_ERR_INPUT;
  case ErrorCode::Io: return TGF_ERR_IO;
  case ErrorCode::Internal: return TGF_ERR_INTERNAL;
  }
  return TGF_ERR_INTERNAL;
}

tgf_status fail(tgf_status status, std::string message, std::string id = {}) {
  last_error = std::move(message);
  last_error_id = std::move(id);
  return status;
}

// Runs body, translating exceptions into status codes.
template <class Fn> tgf_status guarded(Fn &&body) {
  try {
    body();
    return TGF_OK;
  } catch (const tgforge::Error &e) {
    return fail(status_of(e.code()), e.what(), e.offending_id());
  } catch (const std::bad_alloc &) {
    return fail(TGF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return fail(TGF_ERR_INTERNAL, e.what());
  }
}

char *dup_string(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string read_file(const char *path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tgforge::Error(tgforge::ErrorCode::Io, std::string("cannot open '") + path + "'", path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw tgforge::Error(tgforge::ErrorCode::Io, std::string("cannot read '") + path + "'", path);
  return std::move(buf).str();
}

tgforge::LayoutParams to_cpp(const tgf_layout_params &p) {
  tgforge::LayoutParams out;
  out.ideal_edge_length = p.ideal_edge_length;
  out.k_repel = p.k_repel;
  out.k_attract = p.k_attract;
  out.k_hierarchy = p.k_hierarchy;
  out.theta = p.theta;
  out.max_iterations = p.max_iterations;
  out.convergence_eps = p.convergence_eps;
  out.initial_temperature = p.initial_temperature;
  out.cooling_factor = p.cooling_factor;
  out.seed = p.seed;
  out.min_distance = p.min_distance;
  out.repulsion = p.repulsion == TGF_REPULSION_DIRECT ? tgforge::RepulsionMethod::Direct
                                                      : tgforge::RepulsionMethod::BarnesHut;
  return out;
}

tgf_layout_params to_c(const tgforge::LayoutParams &p) {
  tgf_layout_params out;
  out.ideal_edge_length = p.ideal_edge_length;
  out.k_repel = p.k_repel;
  out.k_attract = p.k_attract;
  out.k_hierarchy = p.k_hierarchy;
  out.theta = p.theta;
  out.max_iterations = p.max_iterations;
  out.convergence_eps = p.convergence_eps;
  out.initial_temperature = p.initial_temperature;
  out.cooling_factor = p.cooling_factor;
  out.seed = p.seed;
  out.min_distance = p.min_distance;
  out.repulsion = p.repulsion == tgforge::RepulsionMethod::Direct ? TGF_REPULSION_DIRECT
                                                                  : TGF_REPULSION_BARNES_HUT;
  return out;
}

#define TGF_REQUIRE(cond, what)                                                                   \
  do {                                                                                             \
    if (!(cond)) return fail(TGF_ERR_INPUT, what);                                                 \
  } while (0)

} // namespace

extern "C" {

const char *tgf_version(void) { return "0.1.0"; }
const char *tgf_last_error(void) { return last_error.c_str(); }
const char *tgf_last_error_id(void) { return last_error_id.c_str(); }
void tgf_string_free(char *str) { std::free(str); }

const char *tgf_status_name(tgf_status status) {
  switch (status) {
  case TGF_OK: return "ok";
  case TGF_ERR_PARSE: return tgforge::to_string(tgforge::ErrorCode::Parse);
  case TGF_ERR_SCHEMA: return tgforge::to_string(tgforge::ErrorCode::Schema);
  case TGF_ERR_REFERENCE: return tgforge::to_string(tgforge::ErrorCode::Reference);
  case TGF_ERR_DUPLICATE: return tgforge::to_string(tgforge::ErrorCode::Duplicate);
  case TGF_ERR_SELF_LOOP: return tgforge::to_string(tgforge::ErrorCode::SelfLoop);
  case TGF_ERR_INPUT: return tgforge::to_string(tgforge::ErrorCode::Input);
  case TGF_ERR_IO: return tgforge::to_string(tgforge::ErrorCode::Io);
  case TGF_ERR_INTERNAL: return tgforge::to_string(tgforge::ErrorCode::Internal);
  }
  return "unknown";
}

tgf_status tgf_graph_parse(const char *json, size_t length, int allow_self_loops, tgf_graph **out) {
  TGF_REQUIRE(out && (json || length == 0), "tgf_graph_parse: null argument");
  *out = nullptr;
  return guarded([&] {
    auto g = std::make_shared<const tgforge::TheoryGraph>(tgforge::parse_graph(
        std::string_view(json ? json : "", length), {.allow_self_loops = allow_self_loops != 0}));
    *out = new tgf_graph{std::move(g)};
  });
}

tgf_status tgf_graph_load(const char *path, int allow_self_loops, tgf_graph **out) {
  TGF_REQUIRE(out && path, "tgf_graph_load: null argument");
  *out = nullptr;
  return guarded([&] {
    const std::string text = read_file(path);
    auto g = std::make_shared<const tgforge::TheoryGraph>(
        tgforge::parse_graph(text, {.allow_self_loops = allow_self_loops != 0}));
    *out = new tgf_graph{std::move(g)};
  });
}

void tgf_graph_free(tgf_graph *graph) { delete graph; }

size_t tgf_graph_node_count(const tgf_graph *graph) { return graph ? graph->graph->node_count() : 0; }
size_t tgf_graph_edge_count(const tgf_graph *graph) { return graph ? graph->graph->edge_count() : 0; }

tgf_status tgf_graph_serialize(const tgf_graph *graph, char **out_json) {
  TGF_REQUIRE(graph && out_json, "tgf_graph_serialize: null argument");
  return guarded([&] { *out_json = dup_string(tgforge::serialize_graph(*graph->graph)); });
}

tgf_status tgf_graph_validate(const tgf_graph *graph, char **out_report_json, int *out_dag_ok) {
  TGF_REQUIRE(graph && out_report_json, "tgf_graph_validate: null argument");
  return guarded([&] {
    const tgforge::ValidationReport report = tgforge::validate(*graph->graph);
    *out_report_json = dup_string(tgforge::to_json(report));
    if (out_dag_ok) *out_dag_ok = report.import_dag_ok ? 1 : 0;
  });
}

void tgf_layout_params_default(tgf_layout_params *params) {
  if (params) *params = to_c(tgforge::LayoutParams{});
}

tgf_status tgf_layout_params_merge_json(tgf_layout_params *params, const char *json, size_t length) {
  TGF_REQUIRE(params && json, "tgf_layout_params_merge_json: null argument");
  return guarded([&] {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(std::string_view(json, length));
    } catch (const nlohmann::json::parse_error &e) {
      throw tgforge::Error(tgforge::ErrorCode::Parse, std::string("malformed parameters: ") + e.what());
    }
    *params = to_c(tgforge::params_from_json(doc, to_cpp(*params)));
  });
}

tgf_status tgf_layout_params_validate(const tgf_layout_params *params) {
  TGF_REQUIRE(params, "tgf_layout_params_validate: null argument");
  return guarded([&] { to_cpp(*params).validate(); });
}

tgf_status tgf_layout_params_to_json(const tgf_layout_params *params, char **out_json) {
  TGF_REQUIRE(params && out_json, "tgf_layout_params_to_json: null argument");
  return guarded([&] { *out_json = dup_string(tgforge::params_to_json(to_cpp(*params)).dump()); });
}

tgf_status tgf_layout_run(const tgf_graph *graph, const tgf_layout_params *params, unsigned threads,
                          tgf_progress_fn on_progress, void *user_data, tgf_layout **out) {
  TGF_REQUIRE(graph && out, "tgf_layout_run: null argument");
  *out = nullptr;
  return guarded([&] {
    const tgforge::LayoutParams p = params ? to_cpp(*params) : tgforge::LayoutParams{};
    std::stop_source stop;
    tgforge::RunOptions options;
    options.threads = threads;
    options.stop = stop.get_token();
    if (on_progress) {
      options.on_progress = [&](const tgforge::LayoutProgress &progress) {
        const tgf_progress c{progress.iteration, progress.max_displacement,
                             progress.mean_edge_length, progress.temperature};
        if (on_progress(&c, user_data) != 0) stop.request_stop();
      };
    }
    tgforge::Layout layout = tgforge::run_layout(*graph->graph, p, options);
    *out = new tgf_layout{std::move(layout), p};
  });
}

tgf_status tgf_layout_initial(const tgf_graph *graph, const tgf_layout_params *params, tgf_layout **out) {
  TGF_REQUIRE(graph && out, "tgf_layout_initial: null argument");
  *out = nullptr;
  return guarded([&] {
    const tgforge::LayoutParams p = params ? to_cpp(*params) : tgforge::LayoutParams{};
    *out = new tgf_layout{tgforge::initial_placement(*graph->graph, p), p};
  });
}

tgf_status tgf_layout_parse(const tgf_graph *graph, const char *json, size_t length, tgf_layout **out) {
  TGF_REQUIRE(graph && json && out, "tgf_layout_parse: null argument");
  *out = nullptr;
  return guarded([&] {
    tgforge::LayoutDocument doc = tgforge::parse_layout(*graph->graph, std::string_view(json, length));
    *out = new tgf_layout{std::move(doc.layout), doc.params};
  });
}

void tgf_layout_free(tgf_layout *layout) { delete layout; }

int tgf_layout_converged(const tgf_layout *layout) { return layout && layout->layout.converged ? 1 : 0; }

int32_t tgf_layout_iterations(const tgf_layout *layout) {
  return layout ? layout->layout.iterations_run : 0;
}

size_t tgf_layout_positions(const tgf_layout *layout, double *xyz, size_t capacity) {
  if (!layout) return 0;
  const auto &positions = layout->layout.positions;
  if (xyz) {
    const size_t n = capacity < positions.size() ? capacity : positions.size();
    for (size_t i = 0; i < n; ++i) {
      xyz[3 * i] = positions[i].x;
      xyz[3 * i + 1] = positions[i].y;
      xyz[3 * i + 2] = positions[i].z;
    }
  }
  return positions.size();
}

tgf_status tgf_layout_serialize(const tgf_graph *graph, const tgf_layout *layout, char **out_json) {
  TGF_REQUIRE(graph && layout && out_json, "tgf_layout_serialize: null argument");
  return guarded([&] {
    *out_json = dup_string(tgforge::serialize_layout(*graph->graph, layout->layout,
                                                     layout->params ? &*layout->params : nullptr));
  });
}

tgf_status tgf_layout_metrics(const tgf_graph *graph, const tgf_layout *layout, char **out_json) {
  TGF_REQUIRE(graph && layout && out_json, "tgf_layout_metrics: null argument");
  return guarded([&] {
    const auto metrics = tgforge::layout_metrics(*graph->graph, layout->layout);
    *out_json = dup_string(tgforge::metrics_to_json(metrics).dump());
  });
}

tgf_status tgf_layout_rotate(const tgf_layout *layout, double angle, tgf_layout **out) {
  TGF_REQUIRE(layout && out, "tgf_layout_rotate: null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new tgf_layout{tgforge::rotate_about_vertical(layout->layout, angle), layout->params};
  });
}

tgf_status tgf_layout_scale(const tgf_layout *layout, double factor, const double pivot[3],
                            tgf_layout **out) {
  TGF_REQUIRE(layout && pivot && out, "tgf_layout_scale: null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new tgf_layout{
        tgforge::scale_positions(layout->layout, factor, {pivot[0], pivot[1], pivot[2]}),
        layout->params};
  });
}

tgf_status tgf_filter_visible(const tgf_graph *graph, const tgf_layout *layout,
                              const char *filter_json, size_t length, char **out_json) {
  TGF_REQUIRE(graph && filter_json && out_json, "tgf_filter_visible: null argument");
  return guarded([&] {
    const auto spec = tgforge::parse_filter_spec(std::string_view(filter_json, length));
    const auto visible =
        tgforge::apply_filter(*graph->graph, spec, layout ? &layout->layout : nullptr);
    *out_json = dup_string(tgforge::to_json(*graph->graph, visible));
  });
}

tgf_status tgf_filter_apply(const tgf_graph *graph, const tgf_layout *layout, const char *filter_json,
                            size_t length, tgf_graph **out_graph, tgf_layout **out_layout) {
  TGF_REQUIRE(graph && filter_json && out_graph, "tgf_filter_apply: null argument");
  *out_graph = nullptr;
  if (out_layout) *out_layout = nullptr;
  return guarded([&] {
    const auto spec = tgforge::parse_filter_spec(std::string_view(filter_json, length));
    const auto visible =
        tgforge::apply_filter(*graph->graph, spec, layout ? &layout->layout : nullptr);
    auto sub = std::make_shared<const tgforge::TheoryGraph>(
        tgforge::restrict_graph(*graph->graph, visible));
    std::unique_ptr<tgf_layout> sub_layout;
    if (layout && out_layout)
      sub_layout.reset(new tgf_layout{tgforge::restrict_layout(layout->layout, visible),
                                      layout->params});
    *out_graph = new tgf_graph{std::move(sub)};
    if (out_layout) *out_layout = sub_layout.release();
  });
}

tgf_status tgf_server_create(const tgf_graph *graph, const char *host, int port, const char *web_root,
                             unsigned threads, tgf_server **out) {
  TGF_REQUIRE(graph && host && out, "tgf_server_create: null argument");
  TGF_REQUIRE(port >= 0 && port <= 65535, "tgf_server_create: port out of range");
  *out = nullptr;
  return guarded([&] {
    tgforge::ServiceOptions options;
    options.web_root = web_root ? web_root : "";
    options.threads = threads;
    auto service = std::make_unique<tgforge::ViewerService>(graph->graph, options);
    service->bind(host, port);
    *out = new tgf_server{std::move(service)};
  });
}

int tgf_server_port(const tgf_server *server) { return server ? server->service->port() : -1; }

tgf_status tgf_server_run(tgf_server *server) {
  TGF_REQUIRE(server, "tgf_server_run: null argument");
  return guarded([&] { server->service->run(); });
}

void tgf_server_stop(tgf_server *server) {
  if (server) server->service->stop();
}

void tgf_server_free(tgf_server *server) { delete server; }

} // extern "C"
