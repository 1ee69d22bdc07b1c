#pragma once

#include "graph_model.hpp"
#include "octree.hpp"
#include "vec3.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

namespace tgforge {

enum class RepulsionMethod {
  BarnesHut, // octree with the configured theta (theta = 0 is exact)
  Direct,    // plain O(n^2) pair sum
};

struct LayoutParams {
  double ideal_edge_length = 1.0;
  double k_repel = 1.0;
  double k_attract = 1.0;
  double k_hierarchy = 7.5;
  double theta = 0.75;
  int max_iterations = 500;
  // Stop once the largest per-node move drops below this many edge lengths.
  double convergence_eps = 1e-3;
  // Initial per-step move cap as a fraction of the placement radius.
  double initial_temperature = 0.1;
  double cooling_factor = 0.95;
  std::uint64_t seed = 1;
  double min_distance = 1e-3;
  RepulsionMethod repulsion = RepulsionMethod::BarnesHut;

  /// Throws Error(Input) whose offending id is the field name.
  void validate() const;

  friend bool operator==(const LayoutParams &, const LayoutParams &) = default;
};

/// Node positions indexed like TheoryGraph::nodes().
struct Layout {
  std::vector<Vec3> positions;
  int iterations_run = 0;
  bool converged = false;
  double final_max_displacement = 0.0;
};

struct LayoutProgress {
  int iteration = 0;
  double max_displacement = 0.0;
  double mean_edge_length = 0.0;
  double temperature = 0.0;
  // Positions after this iteration (pre-recentering).
  std::span<const Vec3> positions;
};

using ProgressCallback = std::function<void(const LayoutProgress &)>;

/// Per-node force contributions, kept separate for diagnostics and tests.
struct ForceBreakdown {
  std::vector<Vec3> attraction;
  std::vector<Vec3> repulsion;
  std::vector<Vec3> hierarchy;

  Vec3 total(std::size_t i) const { return attraction[i] + repulsion[i] + hierarchy[i]; }
};

struct StepResult {
  Layout layout;
  double max_displacement = 0.0;
};

struct RunOptions {
  ProgressCallback on_progress;
  // Honoured between iterations; the partial layout is returned (not converged).
  std::stop_token stop;
  // 0 = hardware concurrency. Results do not depend on this.
  unsigned threads = 1;
};

/// Hierarchical force-directed layout. Construction precomputes per-node
/// incidence; the engine holds a reference to the graph, which must outlive it.
class LayoutEngine {
public:
  LayoutEngine(const TheoryGraph &graph, LayoutParams params, unsigned threads = 1);

  const LayoutParams &params() const { return params_; }
  const TheoryGraph &graph() const { return graph_; }

  /// Radius of the initial placement ball, L * cbrt(|V|).
  double placement_radius() const;

  Layout initial_placement() const;

  /// Forces at `positions`. Attraction is undirected along every edge;
  /// repulsion acts between all pairs; the hierarchy force pushes each
  /// hierarchical edge's source down and its target up by a constant amount.
  ForceBreakdown forces(std::span<const Vec3> positions) const;

  /// One synchronous update: each node moves along its net force by
  /// min(|F|, temperature * L).
  StepResult step(const Layout &layout, double temperature) const;

  /// Iterates from the seeded initial placement until the largest move is
  /// below convergence_eps * L or max_iterations is reached, then translates
  /// the centroid to the origin.
  Layout run(const RunOptions &options = {}) const;
  Layout run_from(Layout start, const RunOptions &options = {}) const;

private:
  struct Incidence {
    std::uint32_t other;
    double attraction;  // attraction_weight * k_attract
    double vertical;    // signed: +k_h*w_h at the target, -k_h*w_h at the source
  };

  template <class Fn> void parallel_for(std::size_t n, Fn &&fn) const;

  const TheoryGraph &graph_;
  LayoutParams params_;
  unsigned threads_;
  std::vector<std::vector<Incidence>> incidence_;
};

/// Convenience wrappers over LayoutEngine.
Layout initial_placement(const TheoryGraph &graph, const LayoutParams &params);
StepResult step(const TheoryGraph &graph, const Layout &layout, const LayoutParams &params,
                double temperature);
Layout run_layout(const TheoryGraph &graph, const LayoutParams &params,
                  const RunOptions &options = {});

struct LayoutMetrics {
  double mean_edge_length = 0.0;
  // Share of edges with hierarchy_weight > 0 whose target is strictly higher
  // than their source; 1.0 with `vacuous` set when there are none.
  double upward_fraction = 1.0;
  bool vacuous = true;
  std::size_t hierarchical_edges = 0;
  Box3 bounding_box;
  std::map<std::string, std::size_t> edges_per_kind;
};

LayoutMetrics layout_metrics(const TheoryGraph &graph, const Layout &layout);
double mean_edge_length(const TheoryGraph &graph, std::span<const Vec3> positions);

} // namespace tgforge
