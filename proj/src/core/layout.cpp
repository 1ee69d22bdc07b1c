#include "layout.hpp"

#include "error.hpp"
#include "prng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>
#include <tuple>

namespace tgforge {

namespace {

void require(bool ok, const char *field, const char *rule) {
  if (!ok) throw Error(ErrorCode::Input, std::string(field) + " must be " + rule, field);
}

} // namespace

void LayoutParams::validate() const {
  require(std::isfinite(ideal_edge_length) && ideal_edge_length > 0, "idealEdgeLength",
          "finite and > 0");
  require(std::isfinite(k_repel) && k_repel > 0, "kRepel", "finite and > 0");
  require(std::isfinite(k_attract) && k_attract > 0, "kAttract", "finite and > 0");
  require(std::isfinite(k_hierarchy) && k_hierarchy >= 0, "kHierarchy", "finite and >= 0");
  require(std::isfinite(theta) && theta >= 0, "theta", "finite and >= 0");
  require(max_iterations > 0, "maxIterations", "> 0");
  require(std::isfinite(convergence_eps) && convergence_eps > 0, "convergenceEps",
          "finite and > 0");
  require(std::isfinite(initial_temperature) && initial_temperature > 0, "initialTemperature",
          "finite and > 0");
  require(std::isfinite(cooling_factor) && cooling_factor > 0 && cooling_factor <= 1,
          "coolingFactor", "in (0, 1]");
  require(std::isfinite(min_distance) && min_distance > 0, "minDistance", "finite and > 0");
}

LayoutEngine::LayoutEngine(const TheoryGraph &graph, LayoutParams params, unsigned threads)
    : graph_(graph), params_(params),
      threads_(threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads) {
  params_.validate();
  incidence_.resize(graph_.node_count());
  for (const GraphEdge &e : graph_.edges()) {
    if (e.source == e.target) continue;
    const EdgeKind &kind = graph_.kind_of(e);
    const double attraction = kind.attraction_weight * params_.k_attract;
    const double vertical = kind.hierarchy_weight * params_.k_hierarchy;
    incidence_[e.source].push_back({static_cast<std::uint32_t>(e.target), attraction, -vertical});
    incidence_[e.target].push_back({static_cast<std::uint32_t>(e.source), attraction, vertical});
  }
}

template <class Fn> void LayoutEngine::parallel_for(std::size_t n, Fn &&fn) const {
  const std::size_t workers = std::min<std::size_t>(threads_, n / 64);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (std::size_t i = 0; i < std::min(n, chunk); ++i) fn(i);
}

double LayoutEngine::placement_radius() const {
  return params_.ideal_edge_length * std::cbrt(static_cast<double>(graph_.node_count()));
}

Layout LayoutEngine::initial_placement() const {
  const std::size_t n = graph_.node_count();
  const double radius = placement_radius();
  SplitMix64 rng(params_.seed);
  auto unit_ball = [&rng] {
    for (;;) {
      const Vec3 p{rng.symmetric(), rng.symmetric(), rng.symmetric()};
      if (dot(p, p) <= 1.0) return p;
    }
  };

  Layout layout;
  layout.positions.resize(n);
  for (Vec3 &p : layout.positions) p = unit_ball() * radius;

  // Separate exact duplicates; repeat in case jitter lands on another point.
  const double jitter = 1e-4 * params_.ideal_edge_length;
  std::vector<std::size_t> order(n);
  for (bool moved = true; moved;) {
    moved = false;
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto key = [&](std::size_t i) {
      const Vec3 &p = layout.positions[i];
      return std::tuple(p.x, p.y, p.z, i);
    };
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    for (std::size_t k = 1; k < n; ++k) {
      if (layout.positions[order[k]] != layout.positions[order[k - 1]]) continue;
      Vec3 dir;
      do {
        dir = unit_ball();
      } while (dot(dir, dir) < 1e-6);
      layout.positions[order[k]] += dir * (jitter / norm(dir));
      moved = true;
    }
  }
  return layout;
}

ForceBreakdown LayoutEngine::forces(std::span<const Vec3> positions) const {
  const std::size_t n = graph_.node_count();
  if (positions.size() != n)
    throw Error(ErrorCode::Input, "layout does not cover every node of the graph");

  ForceBreakdown out;
  out.attraction.assign(n, Vec3{});
  out.repulsion.assign(n, Vec3{});
  out.hierarchy.assign(n, Vec3{});
  if (n == 0) return out;

  const double L = params_.ideal_edge_length;
  const RepulsionKernel kernel{params_.k_repel * L * L, params_.min_distance};
  std::optional<Octree> tree;
  if (params_.repulsion == RepulsionMethod::BarnesHut) tree.emplace(positions);

  parallel_for(n, [&](std::size_t v) {
    const Vec3 &pv = positions[v];
    Vec3 attraction;
    double vertical = 0.0;
    for (const Incidence &inc : incidence_[v]) {
      const Vec3 toward = positions[inc.other] - pv;
      const double r = norm(toward);
      if (r > 0.0) {
        const double d = std::max(r, params_.min_distance);
        attraction += toward * (inc.attraction * d * d / L / r);
      }
      vertical += inc.vertical;
    }
    out.attraction[v] = attraction;
    out.hierarchy[v] = {0.0, vertical, 0.0};
    out.repulsion[v] = tree ? tree->approx_repulsion(pv, params_.theta, kernel,
                                                     static_cast<std::uint32_t>(v))
                            : direct_repulsion(positions, v, kernel);
  });
  return out;
}

StepResult LayoutEngine::step(const Layout &layout, double temperature) const {
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw Error(ErrorCode::Input, "temperature must be finite and > 0", "temperature");
  const ForceBreakdown f = forces(layout.positions);
  const double cap = temperature * params_.ideal_edge_length;

  StepResult result;
  result.layout = layout;
  std::vector<Vec3> &next = result.layout.positions;
  for (std::size_t v = 0; v < next.size(); ++v) {
    const Vec3 force = f.total(v);
    const double magnitude = norm(force);
    if (!std::isfinite(magnitude))
      throw Error(ErrorCode::Internal,
                  "non-finite force on node '" + graph_.node(v).id + "'", graph_.node(v).id);
    if (magnitude == 0.0) continue;
    const double move = std::min(magnitude, cap);
    next[v] += force * (move / magnitude);
    result.max_displacement = std::max(result.max_displacement, move);
  }
  return result;
}

Layout LayoutEngine::run(const RunOptions &options) const {
  return run_from(initial_placement(), options);
}

Layout LayoutEngine::run_from(Layout layout, const RunOptions &options) const {
  const std::size_t n = graph_.node_count();
  if (layout.positions.size() != n)
    throw Error(ErrorCode::Input, "layout does not cover every node of the graph");
  layout.iterations_run = 0;
  layout.converged = false;
  layout.final_max_displacement = 0.0;
  if (n == 0) {
    layout.converged = true;
    return layout;
  }

  const double threshold = params_.convergence_eps * params_.ideal_edge_length;
  double temperature = params_.initial_temperature * placement_radius();
  for (int it = 1; it <= params_.max_iterations; ++it) {
    if (options.stop.stop_requested()) break;
    StepResult s = step(layout, temperature);
    layout.positions = std::move(s.layout.positions);
    layout.iterations_run = it;
    layout.final_max_displacement = s.max_displacement;
    if (options.on_progress) {
      options.on_progress({it, s.max_displacement, mean_edge_length(graph_, layout.positions),
                           temperature, layout.positions});
    }
    temperature *= params_.cooling_factor;
    if (s.max_displacement < threshold) {
      layout.converged = true;
      break;
    }
  }

  Vec3 centroid;
  for (const Vec3 &p : layout.positions) centroid += p;
  centroid *= 1.0 / static_cast<double>(n);
  for (Vec3 &p : layout.positions) p -= centroid;
  return layout;
}

Layout initial_placement(const TheoryGraph &graph, const LayoutParams &params) {
  return LayoutEngine(graph, params).initial_placement();
}

StepResult step(const TheoryGraph &graph, const Layout &layout, const LayoutParams &params,
                double temperature) {
  return LayoutEngine(graph, params).step(layout, temperature);
}

Layout run_layout(const TheoryGraph &graph, const LayoutParams &params,
                  const RunOptions &options) {
  return LayoutEngine(graph, params, options.threads).run(options);
}

double mean_edge_length(const TheoryGraph &graph, std::span<const Vec3> positions) {
  if (graph.edge_count() == 0) return 0.0;
  double sum = 0.0;
  for (const GraphEdge &e : graph.edges())
    sum += distance(positions[e.source], positions[e.target]);
  return sum / static_cast<double>(graph.edge_count());
}

LayoutMetrics layout_metrics(const TheoryGraph &graph, const Layout &layout) {
  if (layout.positions.size() != graph.node_count())
    throw Error(ErrorCode::Input, "layout does not cover every node of the graph");
  LayoutMetrics m;
  m.mean_edge_length = mean_edge_length(graph, layout.positions);

  std::size_t upward = 0;
  for (const GraphEdge &e : graph.edges()) {
    if (graph.kind_of(e).hierarchy_weight <= 0.0) continue;
    ++m.hierarchical_edges;
    if (layout.positions[e.target].y > layout.positions[e.source].y) ++upward;
  }
  m.vacuous = m.hierarchical_edges == 0;
  m.upward_fraction =
      m.vacuous ? 1.0 : static_cast<double>(upward) / static_cast<double>(m.hierarchical_edges);

  if (!layout.positions.empty()) {
    m.bounding_box = {layout.positions.front(), layout.positions.front()};
    for (const Vec3 &p : layout.positions) {
      for (int a = 0; a < 3; ++a) {
        m.bounding_box.min[a] = std::min(m.bounding_box.min[a], p[a]);
        m.bounding_box.max[a] = std::max(m.bounding_box.max[a], p[a]);
      }
    }
  }
  for (const EdgeKind &k : graph.kinds()) m.edges_per_kind[k.name] = 0;
  for (const GraphEdge &e : graph.edges()) ++m.edges_per_kind[graph.kind_of(e).name];
  return m;
}

} // namespace tgforge
