#include "graph_model.hpp"

#include "error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <tuple>

namespace tgforge {

using json = nlohmann::json;

const char *to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::Parse: return "parse_error";
  case ErrorCode::Schema: return "schema_error";
  case ErrorCode::Reference: return "reference_error";
  case ErrorCode::Duplicate: return "duplicate_id";
  case ErrorCode::SelfLoop: return "self_loop";
  case ErrorCode::Input: return "invalid_input";
  case ErrorCode::Io: return "io_error";
  case ErrorCode::Internal: return "internal_error";
  }
  return "unknown";
}

Rgb default_kind_color(std::string_view name) {
  if (name == "import") return {64, 64, 255};
  if (name == "view") return {255, 140, 0};
  static constexpr std::array<Rgb, 10> palette{{
      {31, 119, 180}, {44, 160, 44}, {214, 39, 40}, {148, 103, 189}, {140, 86, 75},
      {227, 119, 194}, {127, 127, 127}, {188, 189, 34}, {23, 190, 207}, {255, 187, 120},
  }};
  // FNV-1a, so colors are stable across runs and platforms.
  std::uint32_t h = 2166136261u;
  for (unsigned char c : name) {
    h ^= c;
    h *= 16777619u;
  }
  return palette[h % palette.size()];
}

EdgeKind EdgeKind::with_defaults(std::string name) {
  EdgeKind k;
  k.color = default_kind_color(name);
  k.attraction_weight = 1.0;
  if (name == "import") {
    k.hierarchy_weight = 1.0;
    k.counts_for_hierarchy_validation = true;
  }
  k.name = std::move(name);
  return k;
}

TheoryGraph::TheoryGraph(std::vector<EdgeKind> kinds, std::vector<GraphNode> nodes,
                         std::span<const EdgeSpec> edges, LoadOptions options)
    : kinds_(std::move(kinds)), nodes_(std::move(nodes)) {
  for (KindIndex i = 0; i < kinds_.size(); ++i) {
    const EdgeKind &k = kinds_[i];
    if (k.name.empty()) throw Error(ErrorCode::Schema, "edge kind with empty name");
    if (!std::isfinite(k.hierarchy_weight) || k.hierarchy_weight < 0.0 ||
        !std::isfinite(k.attraction_weight) || k.attraction_weight < 0.0)
      throw Error(ErrorCode::Input, "edge kind '" + k.name + "' has a negative or non-finite weight",
                  k.name);
    if (!kind_lookup_.emplace(k.name, i).second)
      throw Error(ErrorCode::Duplicate, "duplicate edge kind '" + k.name + "'", k.name);
  }

  node_lookup_.reserve(nodes_.size());
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    const GraphNode &n = nodes_[i];
    if (n.id.empty()) throw Error(ErrorCode::Schema, "node with empty id");
    if (n.uri.empty())
      throw Error(ErrorCode::Schema, "node '" + n.id + "' has an empty uri", n.id);
    if (!node_lookup_.emplace(n.id, i).second)
      throw Error(ErrorCode::Duplicate, "duplicate node id '" + n.id + "'", n.id);
  }

  out_.resize(nodes_.size());
  in_.resize(nodes_.size());
  edges_.reserve(edges.size());
  edge_lookup_.reserve(edges.size());
  for (const EdgeSpec &spec : edges) {
    if (spec.id.empty()) throw Error(ErrorCode::Schema, "edge with empty id");
    if (spec.uri.empty())
      throw Error(ErrorCode::Schema, "edge '" + spec.id + "' has an empty uri", spec.id);
    if (spec.kind.empty())
      throw Error(ErrorCode::Schema, "edge '" + spec.id + "' has an empty kind", spec.id);
    auto src = node_lookup_.find(spec.from);
    if (src == node_lookup_.end())
      throw Error(ErrorCode::Reference,
                  "edge '" + spec.id + "' references missing source node '" + spec.from + "'",
                  spec.id);
    auto dst = node_lookup_.find(spec.to);
    if (dst == node_lookup_.end())
      throw Error(ErrorCode::Reference,
                  "edge '" + spec.id + "' references missing target node '" + spec.to + "'",
                  spec.id);
    if (src->second == dst->second && !options.allow_self_loops)
      throw Error(ErrorCode::SelfLoop, "edge '" + spec.id + "' is a self-loop", spec.id);

    auto kind = kind_lookup_.find(spec.kind);
    if (kind == kind_lookup_.end()) {
      EdgeKind k = EdgeKind::with_defaults(spec.kind);
      k.declared = false;
      kinds_.push_back(std::move(k));
      kind = kind_lookup_.emplace(spec.kind, kinds_.size() - 1).first;
    }

    const EdgeIndex e = edges_.size();
    if (!edge_lookup_.emplace(spec.id, e).second)
      throw Error(ErrorCode::Duplicate, "duplicate edge id '" + spec.id + "'", spec.id);
    edges_.push_back({spec.id, src->second, dst->second, kind->second, spec.uri});
    out_[src->second].push_back(e);
    in_[dst->second].push_back(e);
  }
}

std::optional<NodeIndex> TheoryGraph::find_node(std::string_view id) const {
  auto it = node_lookup_.find(std::string(id));
  if (it == node_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<EdgeIndex> TheoryGraph::find_edge(std::string_view id) const {
  auto it = edge_lookup_.find(std::string(id));
  if (it == edge_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<KindIndex> TheoryGraph::find_kind(std::string_view name) const {
  auto it = kind_lookup_.find(std::string(name));
  if (it == kind_lookup_.end()) return std::nullopt;
  return it->second;
}

bool TheoryGraph::structurally_equal(const TheoryGraph &other) const {
  if (nodes_.size() != other.nodes_.size() || edges_.size() != other.edges_.size() ||
      kinds_.size() != other.kinds_.size())
    return false;
  for (const EdgeKind &k : kinds_) {
    auto j = other.find_kind(k.name);
    if (!j || !(other.kinds_[*j] == k)) return false;
  }
  for (const GraphNode &n : nodes_) {
    auto j = other.find_node(n.id);
    if (!j || !(other.nodes_[*j] == n)) return false;
  }
  for (const GraphEdge &e : edges_) {
    auto j = other.find_edge(e.id);
    if (!j) return false;
    const GraphEdge &o = other.edges_[*j];
    if (std::tie(nodes_[e.source].id, nodes_[e.target].id, kinds_[e.kind].name, e.uri) !=
        std::tie(other.nodes_[o.source].id, other.nodes_[o.target].id, other.kinds_[o.kind].name,
                 o.uri))
      return false;
  }
  return true;
}

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

const json &require(const json &obj, const char *key, const std::string &where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw Error(ErrorCode::Schema, where + ": missing required field '" + key + "'");
  return *it;
}

std::string require_string(const json &obj, const char *key, const std::string &where) {
  const json &v = require(obj, key, where);
  if (!v.is_string()) throw Error(ErrorCode::Schema, where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const json &obj, const char *key,
                                           const std::string &where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string())
    throw Error(ErrorCode::Schema, where + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

const json *optional_array(const json &doc, const char *key) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return nullptr;
  if (!it->is_array())
    throw Error(ErrorCode::Schema, std::string("top-level '") + key + "' must be an array");
  return &*it;
}

double weight(const json &obj, const char *key, double fallback, const std::string &where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_number())
    throw Error(ErrorCode::Schema, where + ": field '" + key + "' must be a number");
  return it->get<double>();
}

EdgeKind parse_kind(const json &k, std::size_t index) {
  const std::string where = "kinds[" + std::to_string(index) + "]";
  if (!k.is_object()) throw Error(ErrorCode::Schema, where + " must be an object");
  EdgeKind kind = EdgeKind::with_defaults(require_string(k, "name", where));
  if (auto c = k.find("color"); c != k.end() && !c->is_null()) {
    if (!c->is_array() || c->size() != 3)
      throw Error(ErrorCode::Schema, where + ": 'color' must be [r,g,b]", kind.name);
    std::array<std::uint8_t, 3> rgb{};
    for (std::size_t i = 0; i < 3; ++i) {
      const json &ch = (*c)[i];
      if (!ch.is_number_integer() || ch.get<long long>() < 0 || ch.get<long long>() > 255)
        throw Error(ErrorCode::Schema, where + ": color channels must be integers in [0,255]",
                    kind.name);
      rgb[i] = static_cast<std::uint8_t>(ch.get<long long>());
    }
    kind.color = {rgb[0], rgb[1], rgb[2]};
  }
  kind.hierarchy_weight = weight(k, "hierarchyWeight", kind.hierarchy_weight, where);
  kind.attraction_weight = weight(k, "attractionWeight", kind.attraction_weight, where);
  if (auto v = k.find("validateAcyclic"); v != k.end() && !v->is_null()) {
    if (!v->is_boolean())
      throw Error(ErrorCode::Schema, where + ": 'validateAcyclic' must be a boolean", kind.name);
    kind.counts_for_hierarchy_validation = v->get<bool>();
  }
  return kind;
}

} // namespace

TheoryGraph parse_graph(std::string_view text, LoadOptions options) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error &e) {
    auto [line, column] = line_column(text, e.byte);
    throw ParseError("malformed JSON at line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + e.what(),
                     line, column);
  }
  if (!doc.is_object()) throw Error(ErrorCode::Schema, "graph document must be a JSON object");

  std::vector<EdgeKind> kinds;
  if (const json *arr = optional_array(doc, "kinds")) {
    for (std::size_t i = 0; i < arr->size(); ++i) kinds.push_back(parse_kind((*arr)[i], i));
  }

  std::vector<GraphNode> nodes;
  if (const json *arr = optional_array(doc, "nodes")) {
    nodes.reserve(arr->size());
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const json &n = (*arr)[i];
      const std::string where = "nodes[" + std::to_string(i) + "]";
      if (!n.is_object()) throw Error(ErrorCode::Schema, where + " must be an object");
      GraphNode node;
      node.id = require_string(n, "id", where);
      node.label = optional_string(n, "label", where).value_or(node.id);
      node.uri = require_string(n, "uri", where);
      node.details_url = optional_string(n, "detailsUrl", where);
      nodes.push_back(std::move(node));
    }
  }

  std::vector<EdgeSpec> edges;
  if (const json *arr = optional_array(doc, "edges")) {
    edges.reserve(arr->size());
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const json &e = (*arr)[i];
      const std::string where = "edges[" + std::to_string(i) + "]";
      if (!e.is_object()) throw Error(ErrorCode::Schema, where + " must be an object");
      edges.push_back({require_string(e, "id", where), require_string(e, "from", where),
                       require_string(e, "to", where), require_string(e, "kind", where),
                       require_string(e, "uri", where)});
    }
  }

  return TheoryGraph(std::move(kinds), std::move(nodes), edges, options);
}

namespace {

json graph_to_json(const TheoryGraph &graph) {
  json kinds = json::array();
  for (const EdgeKind &k : graph.kinds()) {
    kinds.push_back({{"name", k.name},
                     {"color", {k.color.r, k.color.g, k.color.b}},
                     {"hierarchyWeight", k.hierarchy_weight},
                     {"attractionWeight", k.attraction_weight},
                     {"validateAcyclic", k.counts_for_hierarchy_validation}});
  }
  json nodes = json::array();
  for (const GraphNode &n : graph.nodes()) {
    json node = {{"id", n.id}, {"label", n.label}, {"uri", n.uri}};
    if (n.details_url) node["detailsUrl"] = *n.details_url;
    nodes.push_back(std::move(node));
  }
  json edges = json::array();
  for (const GraphEdge &e : graph.edges()) {
    edges.push_back({{"id", e.id},
                     {"from", graph.node(e.source).id},
                     {"to", graph.node(e.target).id},
                     {"kind", graph.kind_of(e).name},
                     {"uri", e.uri}});
  }
  return {{"kinds", std::move(kinds)}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

} // namespace

std::string serialize_graph(const TheoryGraph &graph) { return graph_to_json(graph).dump(); }

ValidationReport validate(const TheoryGraph &graph) {
  ValidationReport report;

  for (const EdgeKind &k : graph.kinds()) {
    // import and view have well-known defaults; other names are likely typos.
    if (!k.declared && k.name != "import" && k.name != "view")
      report.warnings.push_back({"undeclared_kind",
                                 "edge kind '" + k.name + "' was not declared; using defaults",
                                 k.name});
  }

  // Iterative three-colour DFS over the acyclic-checked edges. Visiting order
  // follows node and edge order, so the witness is deterministic.
  enum class Colour : std::uint8_t { White, Grey, Black };
  const std::size_t n = graph.node_count();
  std::vector<Colour> colour(n, Colour::White);
  std::vector<std::pair<NodeIndex, std::size_t>> stack;

  auto checked = [&](EdgeIndex e) {
    return graph.kind_of(graph.edge(e)).counts_for_hierarchy_validation;
  };

  for (NodeIndex start = 0; start < n && !report.cycle_witness; ++start) {
    if (colour[start] != Colour::White) continue;
    colour[start] = Colour::Grey;
    stack.assign({{start, 0}});
    while (!stack.empty() && !report.cycle_witness) {
      auto &[v, next] = stack.back();
      const auto outs = graph.out_edges(v);
      if (next == outs.size()) {
        colour[v] = Colour::Black;
        stack.pop_back();
        continue;
      }
      const EdgeIndex e = outs[next++];
      if (!checked(e)) continue;
      const NodeIndex w = graph.edge(e).target;
      if (colour[w] == Colour::White) {
        colour[w] = Colour::Grey;
        stack.emplace_back(w, 0);
      } else if (colour[w] == Colour::Grey) {
        std::vector<std::string> cycle;
        auto from = std::find_if(stack.begin(), stack.end(),
                                 [w](const auto &frame) { return frame.first == w; });
        for (auto it = from; it != stack.end(); ++it) cycle.push_back(graph.node(it->first).id);
        cycle.push_back(graph.node(w).id);
        report.cycle_witness = std::move(cycle);
      }
    }
  }

  if (report.cycle_witness) {
    report.import_dag_ok = false;
    std::string path;
    for (const std::string &id : *report.cycle_witness) path += (path.empty() ? "" : " -> ") + id;
    report.warnings.push_back(
        {"hierarchy_cycle", "acyclic-checked edges contain a directed cycle: " + path,
         report.cycle_witness->front()});
  }
  return report;
}

std::string to_json(const ValidationReport &report) {
  auto findings = [](const std::vector<Finding> &list) {
    json arr = json::array();
    for (const Finding &f : list)
      arr.push_back({{"code", f.code}, {"message", f.message}, {"id", f.id}});
    return arr;
  };
  json doc = {{"errors", findings(report.errors)},
              {"warnings", findings(report.warnings)},
              {"import_dag_ok", report.import_dag_ok},
              {"cycle_witness", nullptr}};
  if (report.cycle_witness) doc["cycle_witness"] = *report.cycle_witness;
  return doc.dump();
}

} // namespace tgforge
