// tgforge command-line front end. Talks to the engine only through the C API.
//
// Exit codes: 0 success, 1 input or validation error, 2 internal error.
// Standard output carries one JSON line per command; diagnostics go to stderr.

#include <tgforge/tgforge.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <pthread.h>
#include <unistd.h>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using json = nlohmann::json;

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level log_level() {
  static const Level level = [] {
    const char *env = std::getenv("TGFORGE_LOG");
    const std::string v = env ? env : "warn";
    if (v == "error") return Level::Error;
    if (v == "info") return Level::Info;
    if (v == "debug") return Level::Debug;
    return Level::Warn;
  }();
  return level;
}

void log(Level level, const std::string &message) {
  static constexpr const char *names[] = {"error", "warn", "info", "debug"};
  if (level <= log_level())
    std::cerr << "tgforge: " << names[static_cast<int>(level)] << ": " << message << '\n';
}

/// Carries a process exit code out of a subcommand.
struct Exit {
  int code;
};

int exit_code(tgf_status status) { return status == TGF_ERR_INTERNAL ? 2 : 1; }

[[noreturn]] void fail(tgf_status status, const std::string &context) {
  std::string message = context + ": " + tgf_last_error();
  const std::string id = tgf_last_error_id();
  if (!id.empty()) message += " [" + id + "]";
  log(Level::Error, message);
  throw Exit{exit_code(status)};
}

void check(tgf_status status, const std::string &context) {
  if (status != TGF_OK) fail(status, context);
}

struct GraphDeleter {
  void operator()(tgf_graph *g) const { tgf_graph_free(g); }
};
struct LayoutDeleter {
  void operator()(tgf_layout *l) const { tgf_layout_free(l); }
};
struct ServerDeleter {
  void operator()(tgf_server *s) const { tgf_server_free(s); }
};
struct StringDeleter {
  void operator()(char *s) const { tgf_string_free(s); }
};
using GraphPtr = std::unique_ptr<tgf_graph, GraphDeleter>;
using LayoutPtr = std::unique_ptr<tgf_layout, LayoutDeleter>;
using ServerPtr = std::unique_ptr<tgf_server, ServerDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    log(Level::Error, "cannot open '" + path + "'");
    throw Exit{1};
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

/// Writes via a temporary file in the same directory and an atomic rename, so
/// `path` is either untouched or complete.
void write_atomically(const std::string &path, const std::string &content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      log(Level::Error, "cannot write '" + path + "'");
      throw Exit{1};
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    log(Level::Error, "cannot replace '" + path + "': " + ec.message());
    throw Exit{1};
  }
}

GraphPtr load_graph(const std::string &path, bool allow_self_loops) {
  tgf_graph *raw = nullptr;
  check(tgf_graph_load(path.c_str(), allow_self_loops ? 1 : 0, &raw), "cannot load graph '" + path + "'");
  GraphPtr graph(raw);
  log(Level::Info, "loaded '" + path + "': " + std::to_string(tgf_graph_node_count(raw)) +
                       " nodes, " + std::to_string(tgf_graph_edge_count(raw)) + " edges");
  return graph;
}

LayoutPtr load_layout(const tgf_graph *graph, const std::string &path) {
  const std::string text = read_text(path);
  tgf_layout *raw = nullptr;
  check(tgf_layout_parse(graph, text.data(), text.size(), &raw), "cannot load layout '" + path + "'");
  return LayoutPtr(raw);
}

json take_json(char *raw) {
  StringPtr owned(raw);
  return json::parse(owned.get());
}

void emit(const json &line) { std::cout << line.dump() << std::endl; }

// ---- layout ---------------------------------------------------------------

struct LayoutFlags {
  std::string input;
  std::string output;
  std::string params_file;
  unsigned threads = 0;
  bool allow_self_loops = false;
  tgf_layout_params params{};
  CLI::Option *ideal_edge_length = nullptr;
  CLI::Option *min_distance = nullptr;
};

void add_param_flags(CLI::App &cmd, LayoutFlags &f) {
  tgf_layout_params_default(&f.params);
  tgf_layout_params &p = f.params;
  f.ideal_edge_length =
      cmd.add_option("-L,--ideal-edge-length", p.ideal_edge_length, "Ideal edge length L");
  cmd.add_option("--k-repel", p.k_repel, "Repulsion constant");
  cmd.add_option("--k-attract", p.k_attract, "Attraction constant");
  cmd.add_option("--k-hierarchy", p.k_hierarchy, "Vertical force per hierarchical edge (0 disables)");
  cmd.add_option("--theta", p.theta, "Barnes-Hut opening angle (0 = exact)");
  cmd.add_option("--iterations", p.max_iterations, "Maximum iterations");
  cmd.add_option("--convergence-eps", p.convergence_eps,
                 "Stop when the largest move is below this many edge lengths");
  cmd.add_option("--initial-temperature", p.initial_temperature,
                 "Initial move cap as a fraction of the placement radius");
  cmd.add_option("--cooling", p.cooling_factor, "Per-iteration temperature factor in (0,1]");
  cmd.add_option("--seed", p.seed, "Seed for the initial placement");
  f.min_distance = cmd.add_option("--min-distance", p.min_distance,
                                  "Distance clamp for force kernels (default 1e-3 * L)");
  cmd.add_flag_callback(
      "--exact-repulsion", [&p] { p.repulsion = TGF_REPULSION_DIRECT; },
      "Use the O(n^2) pair sum instead of the octree");
  cmd.add_option("--params", f.params_file,
                 "JSON file of layout parameters; overrides the individual flags");
  cmd.add_option("--threads", f.threads, "Worker threads (0 = all cores); results do not depend on it");
}

/// Finalises parameters before any input is read or output written.
void resolve_params(LayoutFlags &f) {
  if (f.ideal_edge_length->count() > 0 && f.min_distance->count() == 0)
    f.params.min_distance = 1e-3 * f.params.ideal_edge_length;
  if (!f.params_file.empty()) {
    const std::string text = read_text(f.params_file);
    check(tgf_layout_params_merge_json(&f.params, text.data(), text.size()),
          "invalid parameters in '" + f.params_file + "'");
  }
  check(tgf_layout_params_validate(&f.params), "invalid layout parameters");
}

void cmd_layout(LayoutFlags &f) {
  resolve_params(f);
  GraphPtr graph = load_graph(f.input, f.allow_self_loops);

  tgf_layout *raw = nullptr;
  auto progress = [](const tgf_progress *p, void *) -> int {
    if (log_level() >= Level::Debug)
      log(Level::Debug, "iteration " + std::to_string(p->iteration) + " max move " +
                            std::to_string(p->max_displacement));
    return 0;
  };
  check(tgf_layout_run(graph.get(), &f.params, f.threads, progress, nullptr, &raw), "layout failed");
  LayoutPtr layout(raw);

  char *doc = nullptr;
  check(tgf_layout_serialize(graph.get(), layout.get(), &doc), "cannot serialise layout");
  StringPtr owned(doc);
  write_atomically(f.output, owned.get());

  char *metrics = nullptr;
  check(tgf_layout_metrics(graph.get(), layout.get(), &metrics), "cannot compute metrics");
  json m = take_json(metrics);
  emit({{"command", "layout"},
        {"output", f.output},
        {"nodes", tgf_graph_node_count(graph.get())},
        {"edges", tgf_graph_edge_count(graph.get())},
        {"iterations", tgf_layout_iterations(layout.get())},
        {"converged", tgf_layout_converged(layout.get()) != 0},
        {"meanEdgeLength", m["meanEdgeLength"]},
        {"upwardFraction", m["upwardFraction"]},
        {"vacuous", m["vacuous"]}});
}

// ---- validate -------------------------------------------------------------

void cmd_validate(const std::string &input, bool allow_self_loops) {
  tgf_graph *raw = nullptr;
  const tgf_status status = tgf_graph_load(input.c_str(), allow_self_loops ? 1 : 0, &raw);
  if (status != TGF_OK) {
    const std::string message = tgf_last_error();
    log(Level::Error, message);
    emit({{"errors", {{{"code", tgf_status_name(status)},
                       {"message", message},
                       {"id", tgf_last_error_id()}}}},
          {"warnings", json::array()},
          {"import_dag_ok", nullptr},
          {"cycle_witness", nullptr}});
    throw Exit{exit_code(status)};
  }
  GraphPtr graph(raw);
  char *report = nullptr;
  int dag_ok = 0;
  check(tgf_graph_validate(graph.get(), &report, &dag_ok), "validation failed");
  json r = take_json(report);
  for (const auto &w : r["warnings"]) log(Level::Warn, w["message"].get<std::string>());
  emit(r);
  if (!r["errors"].empty()) throw Exit{1};
}

// ---- filter ---------------------------------------------------------------

struct FilterFlags {
  std::string input;
  std::string layout;
  std::string output;
  std::string layout_output;
  std::vector<std::string> kinds;
  std::string reachable_from;
  std::string coreachable_from;
  std::string neighborhood;
  int k = 1;
  std::vector<double> cutoff_center;
  double cutoff_radius = 0.0;
  bool allow_self_loops = false;
  CLI::Option *kinds_opt = nullptr;
  CLI::Option *radius_opt = nullptr;
};

void cmd_filter(FilterFlags &f) {
  json spec = json::object();
  if (f.kinds_opt->count() > 0) spec["enabledKinds"] = f.kinds;
  if (!f.reachable_from.empty()) spec["focus"] = {{"node", f.reachable_from}, {"mode", "reachable"}};
  if (!f.coreachable_from.empty())
    spec["focus"] = {{"node", f.coreachable_from}, {"mode", "coreachable"}};
  if (!f.neighborhood.empty())
    spec["focus"] = {{"node", f.neighborhood}, {"mode", "neighborhood"}, {"k", f.k}};
  if (f.radius_opt->count() > 0) {
    if (f.cutoff_center.size() != 3) f.cutoff_center = {0.0, 0.0, 0.0};
    spec["cutoff"] = {{"center", f.cutoff_center}, {"radius", f.cutoff_radius}};
    if (f.layout.empty()) {
      log(Level::Error, "--cutoff-radius needs --layout");
      throw Exit{1};
    }
  }
  if (!f.layout_output.empty() && f.layout.empty()) {
    log(Level::Error, "--layout-out needs --layout");
    throw Exit{1};
  }

  GraphPtr graph = load_graph(f.input, f.allow_self_loops);
  LayoutPtr layout;
  if (!f.layout.empty()) layout = load_layout(graph.get(), f.layout);

  const std::string text = spec.dump();
  tgf_graph *sub_graph = nullptr;
  tgf_layout *sub_layout = nullptr;
  check(tgf_filter_apply(graph.get(), layout.get(), text.data(), text.size(), &sub_graph,
                         f.layout_output.empty() ? nullptr : &sub_layout),
        "filter failed");
  GraphPtr visible(sub_graph);
  LayoutPtr visible_layout(sub_layout);

  char *doc = nullptr;
  check(tgf_graph_serialize(visible.get(), &doc), "cannot serialise graph");
  StringPtr graph_doc(doc);
  std::optional<std::string> layout_doc;
  if (visible_layout) {
    char *ldoc = nullptr;
    check(tgf_layout_serialize(visible.get(), visible_layout.get(), &ldoc), "cannot serialise layout");
    layout_doc = StringPtr(ldoc).get();
  }
  write_atomically(f.output, graph_doc.get());
  if (layout_doc) write_atomically(f.layout_output, *layout_doc);

  emit({{"command", "filter"},
        {"output", f.output},
        {"filter", spec},
        {"nodes", tgf_graph_node_count(visible.get())},
        {"edges", tgf_graph_edge_count(visible.get())}});
}

// ---- metrics --------------------------------------------------------------

void cmd_metrics(const std::string &input, const std::string &layout_path, bool allow_self_loops) {
  GraphPtr graph = load_graph(input, allow_self_loops);
  LayoutPtr layout = load_layout(graph.get(), layout_path);
  char *metrics = nullptr;
  check(tgf_layout_metrics(graph.get(), layout.get(), &metrics), "cannot compute metrics");
  json m = take_json(metrics);
  m["command"] = "metrics";
  m["nodes"] = tgf_graph_node_count(graph.get());
  m["edges"] = tgf_graph_edge_count(graph.get());
  emit(m);
}

// ---- serve ----------------------------------------------------------------

void cmd_serve(const std::string &input, const std::string &host, int port,
               const std::string &web_root, unsigned threads, bool allow_self_loops) {
  GraphPtr graph = load_graph(input, allow_self_loops);

  // Block the shutdown signals before any server thread exists so that only
  // the waiter below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  tgf_server *raw = nullptr;
  check(tgf_server_create(graph.get(), host.c_str(), port, web_root.c_str(), threads, &raw),
        "cannot start server");
  ServerPtr server(raw);
  graph.reset();

  std::atomic<bool> signalled{false};
  std::thread waiter([&signals, &signalled, s = server.get()] {
    int received = 0;
    sigwait(&signals, &received);
    signalled = true;
    log(Level::Info, "shutting down");
    tgf_server_stop(s);
  });

  const int bound = tgf_server_port(server.get());
  emit({{"command", "serve"},
        {"listening", "http://" + host + ":" + std::to_string(bound)},
        {"port", bound}});
  const tgf_status status = tgf_server_run(server.get());
  // Release the waiter if the server ended on its own.
  if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  check(status, "server failed");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"tgforge: 3D hierarchical layout and exploration of theory graphs"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", tgf_version());

  bool allow_self_loops = false;
  app.add_flag("--allow-self-loops", allow_self_loops, "Accept edges whose source equals their target");

  LayoutFlags layout;
  CLI::App *layout_cmd = app.add_subcommand("layout", "Compute a 3D layout and write it as JSON");
  layout_cmd->add_option("-i,--input", layout.input, "Graph file")->required()->check(CLI::ExistingFile);
  layout_cmd->add_option("-o,--output", layout.output, "Layout file to write")->required();
  add_param_flags(*layout_cmd, layout);

  std::string validate_input;
  CLI::App *validate_cmd = app.add_subcommand("validate", "Check a graph file and report hierarchy cycles");
  validate_cmd->add_option("-i,--input", validate_input, "Graph file")->required();

  FilterFlags filter;
  CLI::App *filter_cmd = app.add_subcommand("filter", "Write the visible part of a graph");
  filter_cmd->add_option("-i,--input", filter.input, "Graph file")->required();
  filter_cmd->add_option("-o,--output", filter.output, "Graph file to write")->required();
  filter_cmd->add_option("--layout", filter.layout, "Layout file (needed for --cutoff-radius)");
  filter_cmd->add_option("--layout-out", filter.layout_output, "Write the layout restricted to the visible nodes");
  filter.kinds_opt = filter_cmd->add_option("--kinds", filter.kinds, "Enabled edge kinds (default: all)")
                         ->delimiter(',');
  auto *reach = filter_cmd->add_option("--reachable-from", filter.reachable_from,
                                       "Keep what is reachable from this node");
  auto *coreach = filter_cmd->add_option("--coreachable-from", filter.coreachable_from,
                                         "Keep what reaches this node (reversed edges)");
  auto *hood = filter_cmd->add_option("--neighborhood", filter.neighborhood,
                                      "Keep nodes within --k undirected hops of this node");
  reach->excludes(coreach)->excludes(hood);
  coreach->excludes(hood);
  filter_cmd->add_option("--k", filter.k, "Neighbourhood radius in hops")->check(CLI::NonNegativeNumber);
  filter_cmd->add_option("--cutoff-center", filter.cutoff_center, "Cutoff centre x,y,z (default origin)")
      ->delimiter(',')
      ->expected(3);
  filter.radius_opt = filter_cmd->add_option("--cutoff-radius", filter.cutoff_radius,
                                             "Hide nodes farther than this from the cutoff centre");

  std::string metrics_input;
  std::string metrics_layout;
  CLI::App *metrics_cmd = app.add_subcommand("metrics", "Report layout quality metrics");
  metrics_cmd->add_option("-i,--input", metrics_input, "Graph file")->required();
  metrics_cmd->add_option("--layout", metrics_layout, "Layout file")->required();

  std::string serve_input;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string web_root;
  unsigned serve_threads = 0;
  CLI::App *serve_cmd = app.add_subcommand("serve", "Serve the graph and layout jobs over HTTP");
  serve_cmd->add_option("-i,--input", serve_input, "Graph file")->required();
  serve_cmd->add_option("--host", host, "Address to bind");
  serve_cmd->add_option("--port", port, "Port to bind (0 picks a free port)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--web-root", web_root, "Directory of viewer assets served at /");
  serve_cmd->add_option("--threads", serve_threads, "Layout worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*layout_cmd) {
      layout.allow_self_loops = allow_self_loops;
      cmd_layout(layout);
    } else if (*validate_cmd) {
      cmd_validate(validate_input, allow_self_loops);
    } else if (*filter_cmd) {
      filter.allow_self_loops = allow_self_loops;
      cmd_filter(filter);
    } else if (*metrics_cmd) {
      cmd_metrics(metrics_input, metrics_layout, allow_self_loops);
    } else if (*serve_cmd) {
      cmd_serve(serve_input, host, port, web_root, serve_threads, allow_self_loops);
    }
  } catch (const Exit &e) {
    return e.code;
  } catch (const std::exception &e) {
    log(Level::Error, e.what());
    return 2;
  }
  return 0;
}
