#pragma once

#include "graph_model.hpp"
#include "layout.hpp"
#include "vec3.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tgforge {

/// Sorted, duplicate-free node and edge indices. Every visible edge has both
/// endpoints visible.
struct VisibleSubgraph {
  std::vector<NodeIndex> nodes;
  std::vector<EdgeIndex> edges;

  friend bool operator==(const VisibleSubgraph &, const VisibleSubgraph &) = default;
};

using KindSet = std::vector<KindIndex>;

/// Resolves kind names; throws Error(Input) for unknown names.
KindSet resolve_kinds(const TheoryGraph &graph, std::span<const std::string> names);
KindSet all_kinds(const TheoryGraph &graph);

VisibleSubgraph filter_by_kinds(const TheoryGraph &graph, const KindSet &enabled);

/// Nodes reachable from `start` along edges of `kinds` (against edge
/// direction when `reversed`), plus the traversed-orientation edges leaving
/// them.
VisibleSubgraph reachable_subgraph(const TheoryGraph &graph, NodeIndex start, bool reversed,
                                   const KindSet &kinds);

/// Nodes within k undirected hops of any centre, and edges of `kinds` between them.
VisibleSubgraph neighborhood_subgraph(const TheoryGraph &graph, std::span<const NodeIndex> centers,
                                      int k, const KindSet &kinds);

VisibleSubgraph distance_cutoff_filter(const TheoryGraph &graph, const Layout &layout,
                                       const Vec3 &center, double radius);

/// (x, y, z) -> (x cos a + z sin a, y, -x sin a + z cos a); y is copied untouched.
Layout rotate_about_vertical(const Layout &layout, double angle);

/// p -> pivot + factor * (p - pivot).
Layout scale_positions(const Layout &layout, double factor, const Vec3 &pivot);

Vec3 centroid(const Layout &layout);

enum class FocusMode { Reachable, Coreachable, Neighborhood };

struct FilterSpec {
  // Empty optional = every registered kind.
  std::optional<std::vector<std::string>> enabled_kinds;
  struct Focus {
    std::string node;
    FocusMode mode = FocusMode::Neighborhood;
    int k = 1;
  };
  std::optional<Focus> focus;
  struct Cutoff {
    Vec3 center;
    double radius = 0.0;
  };
  std::optional<Cutoff> cutoff;
};

/// Throws Error(Schema) for malformed documents.
FilterSpec parse_filter_spec(std::string_view json_text);
std::string to_json(const FilterSpec &spec);

/// Intersection of the kind filter, the focus filter and the distance cutoff.
/// Throws Error(Input) for unknown kinds or nodes, or when a cutoff is given
/// without a layout.
VisibleSubgraph apply_filter(const TheoryGraph &graph, const FilterSpec &spec,
                             const Layout *layout = nullptr);

/// The visible part of the graph as a standalone graph (full kind registry).
TheoryGraph restrict_graph(const TheoryGraph &graph, const VisibleSubgraph &visible);
Layout restrict_layout(const Layout &layout, const VisibleSubgraph &visible);

std::string to_json(const TheoryGraph &graph, const VisibleSubgraph &visible);

} // namespace tgforge
