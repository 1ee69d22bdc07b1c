#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tgforge {

using NodeIndex = std::size_t;
using EdgeIndex = std::size_t;
using KindIndex = std::size_t;

struct GraphNode {
  std::string id;
  std::string label;
  std::string uri;
  std::optional<std::string> details_url;

  friend bool operator==(const GraphNode &, const GraphNode &) = default;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb &, const Rgb &) = default;
};

struct EdgeKind {
  std::string name;
  Rgb color;
  double hierarchy_weight = 0.0;
  double attraction_weight = 1.0;
  bool counts_for_hierarchy_validation = false;
  // False when the kind was registered implicitly by an edge that used it.
  bool declared = true;

  /// Registry defaults for a kind name: "import" is hierarchical and
  /// acyclic-checked, everything else behaves like "view".
  static EdgeKind with_defaults(std::string name);

  friend bool operator==(const EdgeKind &a, const EdgeKind &b) {
    return a.name == b.name && a.color == b.color && a.hierarchy_weight == b.hierarchy_weight &&
           a.attraction_weight == b.attraction_weight &&
           a.counts_for_hierarchy_validation == b.counts_for_hierarchy_validation;
  }
};

Rgb default_kind_color(std::string_view name);

struct GraphEdge {
  std::string id;
  NodeIndex source = 0;
  NodeIndex target = 0;
  KindIndex kind = 0;
  std::string uri;
};

struct LoadOptions {
  bool allow_self_loops = false;
};

/// Raw description of an edge by ids, as it appears in a file.
struct EdgeSpec {
  std::string id;
  std::string from;
  std::string to;
  std::string kind;
  std::string uri;
};

/// Immutable typed directed multigraph. All invariants are checked at
/// construction; a constructed graph is always valid.
class TheoryGraph {
public:
  TheoryGraph() = default;

  /// Throws Error on duplicate ids, dangling references, empty ids/URIs,
  /// bad kind weights, or (unless permitted) self-loops. Kinds referenced by
  /// edges but missing from `kinds` are appended with registry defaults.
  TheoryGraph(std::vector<EdgeKind> kinds, std::vector<GraphNode> nodes,
              std::span<const EdgeSpec> edges, LoadOptions options = {});

  std::span<const GraphNode> nodes() const { return nodes_; }
  std::span<const GraphEdge> edges() const { return edges_; }
  std::span<const EdgeKind> kinds() const { return kinds_; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const GraphNode &node(NodeIndex i) const { return nodes_.at(i); }
  const GraphEdge &edge(EdgeIndex i) const { return edges_.at(i); }
  const EdgeKind &kind(KindIndex i) const { return kinds_.at(i); }
  const EdgeKind &kind_of(const GraphEdge &e) const { return kinds_[e.kind]; }

  std::optional<NodeIndex> find_node(std::string_view id) const;
  std::optional<EdgeIndex> find_edge(std::string_view id) const;
  std::optional<KindIndex> find_kind(std::string_view name) const;

  /// Edge indices leaving / entering each node, in edge order.
  std::span<const EdgeIndex> out_edges(NodeIndex n) const { return out_[n]; }
  std::span<const EdgeIndex> in_edges(NodeIndex n) const { return in_[n]; }

  /// Same node/edge/kind sets; declaration order and `declared` flags ignored.
  bool structurally_equal(const TheoryGraph &other) const;

private:
  std::vector<EdgeKind> kinds_;
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::unordered_map<std::string, NodeIndex> node_lookup_;
  std::unordered_map<std::string, EdgeIndex> edge_lookup_;
  std::unordered_map<std::string, KindIndex> kind_lookup_;
  std::vector<std::vector<EdgeIndex>> out_;
  std::vector<std::vector<EdgeIndex>> in_;
};

TheoryGraph parse_graph(std::string_view text, LoadOptions options = {});
std::string serialize_graph(const TheoryGraph &graph);

struct Finding {
  std::string code;
  std::string message;
  std::string id;

  friend bool operator==(const Finding &, const Finding &) = default;
};

struct ValidationReport {
  std::vector<Finding> errors;
  std::vector<Finding> warnings;
  bool import_dag_ok = true;
  std::optional<std::vector<std::string>> cycle_witness;

  friend bool operator==(const ValidationReport &, const ValidationReport &) = default;
};

/// Checks the subgraph of acyclic-checked kinds for a directed cycle. When
/// one exists the witness lists its node ids with the first repeated last.
ValidationReport validate(const TheoryGraph &graph);

std::string to_json(const ValidationReport &report);

} // namespace tgforge
