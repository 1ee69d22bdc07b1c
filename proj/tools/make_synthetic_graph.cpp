// Writes a synthetic theory graph shaped like a large formal library: an
// import DAG built by preferential attachment onto earlier theories, plus
// views between arbitrary theories (which may close cycles).
//
//   make_synthetic_graph [--nodes N] [--edges M] [--views V] [--seed S] > graph.json

#include "graph_model.hpp"
#include "prng.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace {

std::size_t below(tgforge::SplitMix64 &rng, std::size_t n) {
  return static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Generate a synthetic theory graph"};
  app.option_defaults()->always_capture_default();
  std::size_t node_count = 739;
  std::size_t edge_count = 2851;
  std::size_t view_count = 451;
  std::uint64_t seed = 739;
  app.add_option("--nodes", node_count, "Number of theories");
  app.add_option("--edges", edge_count, "Total number of edges");
  app.add_option("--views", view_count, "How many of the edges are views");
  app.add_option("--seed", seed, "SplitMix64 seed");
  CLI11_PARSE(app, argc, argv);

  if (view_count > edge_count || node_count < 2) {
    std::cerr << "need at least 2 nodes and views <= edges\n";
    return 1;
  }
  const std::size_t import_count = edge_count - view_count;
  const std::size_t max_imports = node_count * (node_count - 1) / 2;
  if (import_count > max_imports) {
    std::cerr << "too many imports for " << node_count << " nodes\n";
    return 1;
  }

  tgforge::SplitMix64 rng(seed);
  std::vector<tgforge::GraphNode> nodes;
  for (std::size_t i = 0; i < node_count; ++i) {
    const std::string id = "t" + std::to_string(i);
    nodes.push_back({id, "Theory" + std::to_string(i), "http://example.org/library?" + id,
                     "http://example.org/library/" + id + ".html"});
  }

  // Theory i imports from earlier theories. Popular foundations attract more
  // importers: pick the endpoint of a previous import half the time.
  std::set<std::pair<std::size_t, std::size_t>> imports;
  std::vector<std::size_t> import_sources;
  while (imports.size() < import_count) {
    const std::size_t to = 1 + below(rng, node_count - 1);
    std::size_t from = below(rng, to);
    if (!import_sources.empty() && rng.uniform() < 0.5) {
      const std::size_t candidate = import_sources[below(rng, import_sources.size())];
      if (candidate < to) from = candidate;
    }
    if (imports.emplace(from, to).second) import_sources.push_back(from);
  }

  std::vector<tgforge::EdgeSpec> edges;
  for (auto [from, to] : imports) {
    const std::string id = "i" + std::to_string(edges.size());
    edges.push_back({id, nodes[from].id, nodes[to].id, "import",
                     "http://example.org/library?" + nodes[to].id + "?include-" + id});
  }
  for (std::size_t v = 0; v < view_count;) {
    const std::size_t from = below(rng, node_count);
    const std::size_t to = below(rng, node_count);
    if (from == to) continue;
    const std::string id = "v" + std::to_string(v++);
    edges.push_back({id, nodes[from].id, nodes[to].id, "view",
                     "http://example.org/library?" + id});
  }

  std::vector<tgforge::EdgeKind> kinds{tgforge::EdgeKind::with_defaults("import"),
                                       tgforge::EdgeKind::with_defaults("view")};
  const tgforge::TheoryGraph graph(std::move(kinds), std::move(nodes), edges);
  std::cout << tgforge::serialize_graph(graph) << '\n';
  return 0;
}
