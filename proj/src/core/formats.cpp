#include "formats.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace tgforge {

using json = nlohmann::json;

namespace {

double number_field(const json &v, const char *field) {
  if (!v.is_number()) throw Error(ErrorCode::Input, std::string(field) + " must be a number", field);
  return v.get<double>();
}

long long integer_field(const json &v, const char *field) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15)
      return static_cast<long long>(d);
  }
  throw Error(ErrorCode::Input, std::string(field) + " must be an integer", field);
}

} // namespace

LayoutParams params_from_json(const json &doc, LayoutParams base) {
  if (!doc.is_object()) throw Error(ErrorCode::Input, "layout parameters must be an object", "params");
  LayoutParams p = base;
  bool explicit_min_distance = false;
  for (const auto &[key, value] : doc.items()) {
    const char *k = key.c_str();
    if (key == "idealEdgeLength") p.ideal_edge_length = number_field(value, k);
    else if (key == "kRepel") p.k_repel = number_field(value, k);
    else if (key == "kAttract") p.k_attract = number_field(value, k);
    else if (key == "kHierarchy") p.k_hierarchy = number_field(value, k);
    else if (key == "theta") p.theta = number_field(value, k);
    else if (key == "maxIterations" || key == "iterations") {
      const long long n = integer_field(value, k);
      if (n <= 0 || n > std::numeric_limits<int>::max())
        throw Error(ErrorCode::Input, "maxIterations must be a positive integer", "maxIterations");
      p.max_iterations = static_cast<int>(n);
    } else if (key == "convergenceEps") p.convergence_eps = number_field(value, k);
    else if (key == "initialTemperature") p.initial_temperature = number_field(value, k);
    else if (key == "coolingFactor") p.cooling_factor = number_field(value, k);
    else if (key == "seed") {
      if (value.is_number_unsigned()) p.seed = value.get<std::uint64_t>();
      else {
        const long long s = integer_field(value, k);
        if (s < 0) throw Error(ErrorCode::Input, "seed must be a non-negative integer", "seed");
        p.seed = static_cast<std::uint64_t>(s);
      }
    } else if (key == "minDistance") {
      p.min_distance = number_field(value, k);
      explicit_min_distance = true;
    } else if (key == "repulsion") {
      const std::string m = value.is_string() ? value.get<std::string>() : "";
      if (m == "barnes-hut") p.repulsion = RepulsionMethod::BarnesHut;
      else if (m == "direct") p.repulsion = RepulsionMethod::Direct;
      else throw Error(ErrorCode::Input, "repulsion must be \"barnes-hut\" or \"direct\"", "repulsion");
    } else {
      throw Error(ErrorCode::Input, "unknown layout parameter '" + key + "'", key);
    }
  }
  if (!explicit_min_distance && p.ideal_edge_length != base.ideal_edge_length)
    p.min_distance = 1e-3 * p.ideal_edge_length;
  p.validate();
  return p;
}

json params_to_json(const LayoutParams &p) {
  return {{"idealEdgeLength", p.ideal_edge_length},
          {"kRepel", p.k_repel},
          {"kAttract", p.k_attract},
          {"kHierarchy", p.k_hierarchy},
          {"theta", p.theta},
          {"maxIterations", p.max_iterations},
          {"convergenceEps", p.convergence_eps},
          {"initialTemperature", p.initial_temperature},
          {"coolingFactor", p.cooling_factor},
          {"seed", p.seed},
          {"minDistance", p.min_distance},
          {"repulsion", p.repulsion == RepulsionMethod::Direct ? "direct" : "barnes-hut"}};
}

std::string serialize_layout(const TheoryGraph &graph, const Layout &layout,
                             const LayoutParams *params) {
  if (layout.positions.size() != graph.node_count())
    throw Error(ErrorCode::Input, "layout does not cover every node of the graph");
  json positions = json::object();
  for (NodeIndex n = 0; n < graph.node_count(); ++n) {
    const Vec3 &p = layout.positions[n];
    positions[graph.node(n).id] = {p.x, p.y, p.z};
  }
  json doc = {{"positions", std::move(positions)},
              {"converged", layout.converged},
              {"iterations", layout.iterations_run},
              {"finalMaxDisplacement", layout.final_max_displacement}};
  if (params) doc["params"] = params_to_json(*params);
  return doc.dump();
}

LayoutDocument parse_layout(const TheoryGraph &graph, std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::Parse, std::string("malformed layout file: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::Schema, "layout document must be a JSON object");
  auto positions = doc.find("positions");
  if (positions == doc.end() || !positions->is_object())
    throw Error(ErrorCode::Schema, "layout document needs a 'positions' object");

  LayoutDocument out;
  out.layout.positions.resize(graph.node_count());
  std::vector<bool> seen(graph.node_count(), false);
  for (const auto &[id, value] : positions->items()) {
    auto n = graph.find_node(id);
    if (!n) throw Error(ErrorCode::Reference, "layout names unknown node '" + id + "'", id);
    if (!value.is_array() || value.size() != 3 ||
        !std::all_of(value.begin(), value.end(), [](const json &v) { return v.is_number(); }))
      throw Error(ErrorCode::Schema, "position of '" + id + "' must be [x,y,z]", id);
    out.layout.positions[*n] = {value[0].get<double>(), value[1].get<double>(),
                                value[2].get<double>()};
    seen[*n] = true;
  }
  for (NodeIndex n = 0; n < seen.size(); ++n)
    if (!seen[n])
      throw Error(ErrorCode::Reference, "layout has no position for node '" + graph.node(n).id + "'",
                  graph.node(n).id);

  if (auto c = doc.find("converged"); c != doc.end() && c->is_boolean())
    out.layout.converged = c->get<bool>();
  if (auto it = doc.find("iterations"); it != doc.end() && it->is_number_integer())
    out.layout.iterations_run = it->get<int>();
  if (auto d = doc.find("finalMaxDisplacement"); d != doc.end() && d->is_number())
    out.layout.final_max_displacement = d->get<double>();
  if (auto p = doc.find("params"); p != doc.end() && !p->is_null())
    out.params = params_from_json(*p);
  return out;
}

json metrics_to_json(const LayoutMetrics &m) {
  const Box3 &b = m.bounding_box;
  return {{"meanEdgeLength", m.mean_edge_length},
          {"upwardFraction", m.upward_fraction},
          {"vacuous", m.vacuous},
          {"hierarchicalEdges", m.hierarchical_edges},
          {"boundingBox", {{"min", {b.min.x, b.min.y, b.min.z}}, {"max", {b.max.x, b.max.y, b.max.z}}}},
          {"edgesPerKind", m.edges_per_kind}};
}

double round_significant(double value, int digits) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return std::strtod(buf, nullptr);
}

} // namespace tgforge
