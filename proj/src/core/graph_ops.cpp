#include "graph_ops.hpp"

#include "error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <deque>

namespace tgforge {

using json = nlohmann::json;

namespace {

std::vector<bool> kind_mask(const TheoryGraph &graph, const KindSet &kinds) {
  std::vector<bool> mask(graph.kinds().size(), false);
  for (KindIndex k : kinds) {
    if (k >= mask.size()) throw Error(ErrorCode::Input, "kind index out of range");
    mask[k] = true;
  }
  return mask;
}

void require_node(const TheoryGraph &graph, NodeIndex n) {
  if (n >= graph.node_count()) throw Error(ErrorCode::Input, "node index out of range");
}

std::vector<NodeIndex> indices_of(const std::vector<bool> &mask) {
  std::vector<NodeIndex> out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.push_back(i);
  return out;
}

// Edges of the enabled kinds whose endpoints are both in `nodes`.
std::vector<EdgeIndex> closed_edges(const TheoryGraph &graph, const std::vector<bool> &nodes,
                                    const std::vector<bool> &kinds) {
  std::vector<EdgeIndex> out;
  for (EdgeIndex e = 0; e < graph.edge_count(); ++e) {
    const GraphEdge &edge = graph.edge(e);
    if (kinds[edge.kind] && nodes[edge.source] && nodes[edge.target]) out.push_back(e);
  }
  return out;
}

} // namespace

KindSet resolve_kinds(const TheoryGraph &graph, std::span<const std::string> names) {
  KindSet out;
  for (const std::string &name : names) {
    auto k = graph.find_kind(name);
    if (!k) throw Error(ErrorCode::Input, "unknown edge kind '" + name + "'", name);
    out.push_back(*k);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

KindSet all_kinds(const TheoryGraph &graph) {
  KindSet out(graph.kinds().size());
  for (KindIndex k = 0; k < out.size(); ++k) out[k] = k;
  return out;
}

VisibleSubgraph filter_by_kinds(const TheoryGraph &graph, const KindSet &enabled) {
  const std::vector<bool> kinds = kind_mask(graph, enabled);
  VisibleSubgraph out;
  out.nodes.resize(graph.node_count());
  for (NodeIndex n = 0; n < out.nodes.size(); ++n) out.nodes[n] = n;
  for (EdgeIndex e = 0; e < graph.edge_count(); ++e)
    if (kinds[graph.edge(e).kind]) out.edges.push_back(e);
  return out;
}

VisibleSubgraph reachable_subgraph(const TheoryGraph &graph, NodeIndex start, bool reversed,
                                   const KindSet &kinds) {
  require_node(graph, start);
  const std::vector<bool> enabled = kind_mask(graph, kinds);
  std::vector<bool> seen(graph.node_count(), false);
  std::deque<NodeIndex> queue{start};
  seen[start] = true;
  while (!queue.empty()) {
    const NodeIndex v = queue.front();
    queue.pop_front();
    for (EdgeIndex e : reversed ? graph.in_edges(v) : graph.out_edges(v)) {
      const GraphEdge &edge = graph.edge(e);
      if (!enabled[edge.kind]) continue;
      const NodeIndex w = reversed ? edge.source : edge.target;
      if (!seen[w]) {
        seen[w] = true;
        queue.push_back(w);
      }
    }
  }

  VisibleSubgraph out;
  out.nodes = indices_of(seen);
  for (EdgeIndex e = 0; e < graph.edge_count(); ++e) {
    const GraphEdge &edge = graph.edge(e);
    if (enabled[edge.kind] && seen[reversed ? edge.target : edge.source]) out.edges.push_back(e);
  }
  return out;
}

VisibleSubgraph neighborhood_subgraph(const TheoryGraph &graph, std::span<const NodeIndex> centers,
                                      int k, const KindSet &kinds) {
  if (centers.empty()) throw Error(ErrorCode::Input, "neighborhood needs at least one centre");
  if (k < 0) throw Error(ErrorCode::Input, "neighborhood radius k must be >= 0", "k");
  const std::vector<bool> enabled = kind_mask(graph, kinds);

  std::vector<int> hops(graph.node_count(), -1);
  std::deque<NodeIndex> queue;
  for (NodeIndex c : centers) {
    require_node(graph, c);
    if (hops[c] < 0) {
      hops[c] = 0;
      queue.push_back(c);
    }
  }
  auto visit = [&](NodeIndex w, int h) {
    if (hops[w] < 0) {
      hops[w] = h;
      queue.push_back(w);
    }
  };
  while (!queue.empty()) {
    const NodeIndex v = queue.front();
    queue.pop_front();
    if (hops[v] == k) continue;
    for (EdgeIndex e : graph.out_edges(v))
      if (enabled[graph.edge(e).kind]) visit(graph.edge(e).target, hops[v] + 1);
    for (EdgeIndex e : graph.in_edges(v))
      if (enabled[graph.edge(e).kind]) visit(graph.edge(e).source, hops[v] + 1);
  }

  std::vector<bool> visible(hops.size());
  for (std::size_t i = 0; i < hops.size(); ++i) visible[i] = hops[i] >= 0;
  return {indices_of(visible), closed_edges(graph, visible, enabled)};
}

VisibleSubgraph distance_cutoff_filter(const TheoryGraph &graph, const Layout &layout,
                                       const Vec3 &center, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::Input, "cutoff radius must be > 0", "radius");
  if (layout.positions.size() != graph.node_count())
    throw Error(ErrorCode::Input, "layout does not cover every node of the graph");
  std::vector<bool> visible(graph.node_count());
  for (NodeIndex n = 0; n < visible.size(); ++n)
    visible[n] = distance(layout.positions[n], center) <= radius;
  return {indices_of(visible),
          closed_edges(graph, visible, std::vector<bool>(graph.kinds().size(), true))};
}

Layout rotate_about_vertical(const Layout &layout, double angle) {
  if (!std::isfinite(angle)) throw Error(ErrorCode::Input, "rotation angle must be finite");
  Layout out = layout;
  if (angle == 0.0) return out;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  for (Vec3 &p : out.positions) {
    const double x = p.x;
    const double z = p.z;
    p.x = x * c + z * s;
    p.z = -x * s + z * c;
  }
  return out;
}

Layout scale_positions(const Layout &layout, double factor, const Vec3 &pivot) {
  if (!std::isfinite(factor) || !(factor > 0.0))
    throw Error(ErrorCode::Input, "scale factor must be finite and > 0", "factor");
  Layout out = layout;
  if (factor == 1.0) return out;
  for (Vec3 &p : out.positions) p = pivot + (p - pivot) * factor;
  return out;
}

Vec3 centroid(const Layout &layout) {
  Vec3 sum;
  if (layout.positions.empty()) return sum;
  for (const Vec3 &p : layout.positions) sum += p;
  return sum * (1.0 / static_cast<double>(layout.positions.size()));
}

namespace {

Vec3 parse_point(const json &j, const char *what) {
  if (!j.is_array() || j.size() != 3 ||
      !std::all_of(j.begin(), j.end(), [](const json &v) { return v.is_number(); }))
    throw Error(ErrorCode::Schema, std::string(what) + " must be [x,y,z]", what);
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

} // namespace

FilterSpec parse_filter_spec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::Parse, std::string("malformed filter spec: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::Schema, "filter spec must be a JSON object");

  FilterSpec spec;
  if (auto it = doc.find("enabledKinds"); it != doc.end() && !it->is_null()) {
    if (!it->is_array() ||
        !std::all_of(it->begin(), it->end(), [](const json &v) { return v.is_string(); }))
      throw Error(ErrorCode::Schema, "enabledKinds must be an array of strings", "enabledKinds");
    spec.enabled_kinds = it->get<std::vector<std::string>>();
  }
  if (auto it = doc.find("focus"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) throw Error(ErrorCode::Schema, "focus must be an object", "focus");
    FilterSpec::Focus focus;
    auto node = it->find("node");
    if (node == it->end() || !node->is_string())
      throw Error(ErrorCode::Schema, "focus.node must be a string", "focus.node");
    focus.node = node->get<std::string>();
    auto mode = it->find("mode");
    if (mode == it->end() || !mode->is_string())
      throw Error(ErrorCode::Schema, "focus.mode must be a string", "focus.mode");
    const std::string m = mode->get<std::string>();
    if (m == "reachable") focus.mode = FocusMode::Reachable;
    else if (m == "coreachable") focus.mode = FocusMode::Coreachable;
    else if (m == "neighborhood") focus.mode = FocusMode::Neighborhood;
    else
      throw Error(ErrorCode::Schema,
                  "focus.mode must be reachable, coreachable or neighborhood, got '" + m + "'",
                  "focus.mode");
    if (auto k = it->find("k"); k != it->end() && !k->is_null()) {
      if (!k->is_number_integer())
        throw Error(ErrorCode::Schema, "focus.k must be an integer", "focus.k");
      const auto value = k->get<long long>();
      if (value < 0 || value > 1'000'000)
        throw Error(ErrorCode::Input, "focus.k must be in [0, 1000000]", "focus.k");
      focus.k = static_cast<int>(value);
    }
    spec.focus = std::move(focus);
  }
  if (auto it = doc.find("cutoff"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) throw Error(ErrorCode::Schema, "cutoff must be an object", "cutoff");
    FilterSpec::Cutoff cutoff;
    auto center = it->find("center");
    if (center == it->end()) throw Error(ErrorCode::Schema, "cutoff.center is required", "cutoff");
    cutoff.center = parse_point(*center, "cutoff.center");
    auto radius = it->find("radius");
    if (radius == it->end() || !radius->is_number())
      throw Error(ErrorCode::Schema, "cutoff.radius must be a number", "cutoff.radius");
    cutoff.radius = radius->get<double>();
    if (!std::isfinite(cutoff.radius) || !(cutoff.radius > 0.0))
      throw Error(ErrorCode::Input, "cutoff.radius must be > 0", "cutoff.radius");
    spec.cutoff = cutoff;
  }
  return spec;
}

std::string to_json(const FilterSpec &spec) {
  json doc = json::object();
  if (spec.enabled_kinds) doc["enabledKinds"] = *spec.enabled_kinds;
  if (spec.focus) {
    static constexpr const char *modes[] = {"reachable", "coreachable", "neighborhood"};
    doc["focus"] = {{"node", spec.focus->node},
                    {"mode", modes[static_cast<int>(spec.focus->mode)]},
                    {"k", spec.focus->k}};
  }
  if (spec.cutoff) {
    const Vec3 &c = spec.cutoff->center;
    doc["cutoff"] = {{"center", {c.x, c.y, c.z}}, {"radius", spec.cutoff->radius}};
  }
  return doc.dump();
}

VisibleSubgraph apply_filter(const TheoryGraph &graph, const FilterSpec &spec,
                             const Layout *layout) {
  const KindSet kinds =
      spec.enabled_kinds ? resolve_kinds(graph, *spec.enabled_kinds) : all_kinds(graph);
  VisibleSubgraph result = filter_by_kinds(graph, kinds);

  auto intersect = [](VisibleSubgraph &acc, const VisibleSubgraph &other) {
    std::vector<NodeIndex> nodes;
    std::set_intersection(acc.nodes.begin(), acc.nodes.end(), other.nodes.begin(),
                          other.nodes.end(), std::back_inserter(nodes));
    std::vector<EdgeIndex> edges;
    std::set_intersection(acc.edges.begin(), acc.edges.end(), other.edges.begin(),
                          other.edges.end(), std::back_inserter(edges));
    acc = {std::move(nodes), std::move(edges)};
  };

  if (spec.focus) {
    auto node = graph.find_node(spec.focus->node);
    if (!node)
      throw Error(ErrorCode::Input, "unknown node '" + spec.focus->node + "'", spec.focus->node);
    switch (spec.focus->mode) {
    case FocusMode::Reachable:
      intersect(result, reachable_subgraph(graph, *node, false, kinds));
      break;
    case FocusMode::Coreachable:
      intersect(result, reachable_subgraph(graph, *node, true, kinds));
      break;
    case FocusMode::Neighborhood: {
      const NodeIndex centers[] = {*node};
      intersect(result, neighborhood_subgraph(graph, centers, spec.focus->k, kinds));
      break;
    }
    }
  }
  if (spec.cutoff) {
    if (!layout) throw Error(ErrorCode::Input, "a distance cutoff needs a layout", "cutoff");
    intersect(result,
              distance_cutoff_filter(graph, *layout, spec.cutoff->center, spec.cutoff->radius));
  }

  // Keep the endpoint closure after intersecting.
  std::vector<bool> visible(graph.node_count(), false);
  for (NodeIndex n : result.nodes) visible[n] = true;
  std::erase_if(result.edges, [&](EdgeIndex e) {
    return !visible[graph.edge(e).source] || !visible[graph.edge(e).target];
  });
  return result;
}

TheoryGraph restrict_graph(const TheoryGraph &graph, const VisibleSubgraph &visible) {
  std::vector<EdgeKind> kinds(graph.kinds().begin(), graph.kinds().end());
  std::vector<GraphNode> nodes;
  nodes.reserve(visible.nodes.size());
  for (NodeIndex n : visible.nodes) nodes.push_back(graph.node(n));
  std::vector<EdgeSpec> edges;
  edges.reserve(visible.edges.size());
  for (EdgeIndex e : visible.edges) {
    const GraphEdge &edge = graph.edge(e);
    edges.push_back({edge.id, graph.node(edge.source).id, graph.node(edge.target).id,
                     graph.kind_of(edge).name, edge.uri});
  }
  return TheoryGraph(std::move(kinds), std::move(nodes), edges, {.allow_self_loops = true});
}

Layout restrict_layout(const Layout &layout, const VisibleSubgraph &visible) {
  Layout out = layout;
  out.positions.clear();
  for (NodeIndex n : visible.nodes) out.positions.push_back(layout.positions.at(n));
  return out;
}

std::string to_json(const TheoryGraph &graph, const VisibleSubgraph &visible) {
  json nodes = json::array();
  for (NodeIndex n : visible.nodes) nodes.push_back(graph.node(n).id);
  json edges = json::array();
  for (EdgeIndex e : visible.edges) edges.push_back(graph.edge(e).id);
  return json{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}}.dump();
}

} // namespace tgforge
