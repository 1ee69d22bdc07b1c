// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include "fixtures.hpp"
#include "force_oracles.hpp"
#include "generators.hpp"
#include "graph_ops.hpp"
#include "layout.hpp"
#include "octree.hpp"
#include "oracles.hpp"
#include "subprocess.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace tgforge;
using namespace tgforge::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

template <class... Args> std::string fmt(const char *format, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Layout layout_of(std::vector<Vec3> points) {
  Layout l;
  l.positions = std::move(points);
  return l;
}

// ---------------------------------------------------------------------------

constexpr std::uint64_t kDagSeeds = 20;

Outcome hierarchy_direction() {
  int upward_ok = 0;
  double worst = 1.0;
  double flat_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= kDagSeeds; ++seed) {
    const auto g = random_dag(100, 300, seed);
    const double up = layout_metrics(g, run_layout(g, {})).upward_fraction;
    worst = std::min(worst, up);
    if (up >= 0.90) ++upward_ok;

    LayoutParams flat;
    flat.k_hierarchy = 0.0;
    flat_sum += layout_metrics(g, run_layout(g, flat)).upward_fraction;
  }
  const double flat_mean = flat_sum / kDagSeeds;
  return {upward_ok >= 18 && flat_mean >= 0.4 && flat_mean <= 0.6,
          fmt("%d/20 graphs with upward fraction >= 0.90 (need 18, worst %.3f); "
              "k_hierarchy=0 mean %.3f (need [0.4, 0.6])",
              upward_ok, worst, flat_mean)};
}

Outcome edge_length_reduction() {
  int ok = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= kDagSeeds; ++seed) {
    const auto g = random_dag(100, 300, seed);
    const LayoutParams params;
    const double before = mean_edge_length(g, initial_placement(g, params).positions);
    const double after = mean_edge_length(g, run_layout(g, params).positions);
    const double ratio = after / before;
    worst = std::max(worst, ratio);
    if (ratio < 0.7) ++ok;
  }
  return {ok == static_cast<int>(kDagSeeds),
          fmt("%d/20 runs below 0.7x the initial mean edge length (worst ratio %.3f)", ok, worst)};
}

Outcome barnes_hut() {
  // theta = 0 step against the pairwise oracle step.
  double worst_step = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = random_digraph(200, 600, seed);
    const Layout start = layout_of(random_points(200, seed + 100, 5.0));
    LayoutParams p;
    p.theta = 0.0;
    const double temperature = 0.2;
    const auto expected = oracle_step(g, start.positions, p, temperature);
    const StepResult got = step(g, start, p, temperature);
    for (std::size_t i = 0; i < expected.size(); ++i)
      for (int a = 0; a < 3; ++a) {
        const double e = expected[i][a];
        const double diff = std::abs(got.layout.positions[i][a] - e);
        worst_step = std::max(worst_step, e == 0.0 ? diff : diff / std::abs(e));
      }
  }

  // theta = 0.75 net repulsion on point clouds against the exact sum.
  const RepulsionKernel kernel{1.0, 1e-3};
  double worst_median = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto pts = random_points(1000, seed);
    const Octree tree(pts);
    std::vector<double> errors;
    for (std::size_t i = 0; i < pts.size(); ++i)
      errors.push_back(relative_error(
          tree.approx_repulsion(pts[i], 0.75, kernel, static_cast<std::uint32_t>(i)),
          oracle_repulsion(pts, i, kernel.strength, kernel.min_distance)));
    worst_median = std::max(worst_median, median(errors));
  }
  return {worst_step <= 1e-9 && worst_median <= 0.05,
          fmt("theta=0 step worst relative coordinate error %.2e (need <= 1e-9); "
              "theta=0.75 worst per-seed median force error %.4f (need <= 0.05)",
              worst_step, worst_median)};
}

Outcome filter_oracles() {
  int mismatches = 0;
  int comparisons = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    SplitMix64 rng(seed * 7919);
    const std::size_t n = 2 + below(rng, 199);
    const std::size_t m = below(rng, 3 * n + 1);
    const auto g = random_digraph(n, m, seed);

    std::vector<std::set<std::string>> kind_sets{{}};
    for (const EdgeKind &k : g.kinds()) {
      kind_sets[0].insert(k.name);
      kind_sets.push_back({k.name});
    }
    for (const auto &names : kind_sets) {
      const std::vector<std::string> list(names.begin(), names.end());
      const KindSet kinds = resolve_kinds(g, list);
      for (int trial = 0; trial < 3; ++trial) {
        const NodeIndex start = below(rng, n);
        const std::string &id = g.node(start).id;
        const int k = static_cast<int>(below(rng, 4));
        const NodeIndex other = below(rng, n);
        const std::vector<NodeIndex> centers{start, other};

        const auto check = [&](const VisibleSubgraph &got, const IdSets &want) {
          ++comparisons;
          if (ids_of(g, got) != want) ++mismatches;
        };
        check(reachable_subgraph(g, start, false, kinds), oracle_reachable(g, id, false, names));
        check(reachable_subgraph(g, start, true, kinds), oracle_reachable(g, id, true, names));
        check(neighborhood_subgraph(g, std::span(centers).first(1), k, kinds),
              oracle_neighborhood(g, {id}, k, names));
        check(neighborhood_subgraph(g, centers, k, kinds),
              oracle_neighborhood(g, {id, g.node(other).id}, k, names));
      }
    }
  }
  return {mismatches == 0,
          fmt("%d of %d subgraphs differ from the oracle on 100 random digraphs", mismatches,
              comparisons)};
}

double pair_distance_error(const Layout &a, const Layout &b, double factor) {
  double worst = 0;
  for (std::size_t i = 0; i < a.positions.size(); ++i)
    for (std::size_t j = i + 1; j < a.positions.size(); ++j) {
      const double before = factor * distance(a.positions[i], a.positions[j]);
      const double after = distance(b.positions[i], b.positions[j]);
      worst = std::max(worst, std::abs(after - before) / before);
    }
  return worst;
}

double round_trip_error(const Layout &a, const Layout &b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.positions.size(); ++i)
    worst = std::max(worst, norm(b.positions[i] - a.positions[i]) / norm(a.positions[i]));
  return worst;
}

Outcome transforms() {
  std::size_t y_changed = 0;
  double rot_dist = 0, scale_dist = 0, inverse = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Layout l = layout_of(random_points(150, seed, 8.0));
    const double angle = 0.37 * static_cast<double>(seed) - 3.1;
    const Layout r = rotate_about_vertical(l, angle);
    for (std::size_t i = 0; i < l.positions.size(); ++i)
      if (std::bit_cast<std::uint64_t>(r.positions[i].y) !=
          std::bit_cast<std::uint64_t>(l.positions[i].y))
        ++y_changed;
    rot_dist = std::max(rot_dist, pair_distance_error(l, r, 1.0));
    inverse = std::max(inverse, round_trip_error(l, rotate_about_vertical(r, -angle)));

    const double factor = 0.3 + 0.41 * static_cast<double>(seed);
    const Vec3 pivot{0.5 * static_cast<double>(seed), -1.25, 2.0};
    const Layout s = scale_positions(l, factor, pivot);
    scale_dist = std::max(scale_dist, pair_distance_error(l, s, factor));
    inverse = std::max(inverse, round_trip_error(l, scale_positions(s, 1.0 / factor, pivot)));
  }
  return {y_changed == 0 && rot_dist <= 1e-12 && scale_dist <= 1e-12 && inverse <= 1e-12,
          fmt("rotation changed %zu y values, distance error %.2e; scaling distance error %.2e; "
              "inverse pairs %.2e (need 0 and <= 1e-12)",
              y_changed, rot_dist, scale_dist, inverse)};
}

Outcome cli_determinism() {
  tgtest::TempDir dir;
  const std::string input = fixture_path("nasa739.json");
  std::vector<std::string> outputs;
  for (const char *name : {"first.json", "second.json"}) {
    const auto out = dir.file(name);
    const auto r = tgtest::run_program(TGFORGE_CLI, {"layout", "-i", input, "-o", out, "--seed", "42"});
    if (r.exit_code != 0) return {false, "layout exited with " + std::to_string(r.exit_code) + ": " + r.err};
    outputs.push_back(read_file(out));
  }
  const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
  return {same, fmt("two runs on the 739-node graph wrote %zu and %zu bytes, %s", outputs[0].size(),
                    outputs[1].size(), same ? "identical" : "different")};
}

Outcome scale_target() {
  const TheoryGraph g = load_fixture("nasa739.json");
  LayoutParams p;
  p.theta = 0.75;
  p.max_iterations = 500;
  // Keep iterating through the full budget.
  p.convergence_eps = std::numeric_limits<double>::min();

  std::vector<Layout> results;
  double slowest = 0;
  for (unsigned threads : {1u, 4u, 0u}) {
    RunOptions options;
    options.threads = threads;
    const auto t0 = std::chrono::steady_clock::now();
    results.push_back(run_layout(g, p, options));
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;
    slowest = std::max(slowest, elapsed.count());
  }
  bool identical = true;
  for (const Layout &l : results)
    for (std::size_t i = 0; i < l.positions.size(); ++i)
      for (int a = 0; a < 3; ++a)
        identical &= std::bit_cast<std::uint64_t>(l.positions[i][a]) ==
                     std::bit_cast<std::uint64_t>(results[0].positions[i][a]);
  const int iterations = results[0].iterations_run;
  return {g.node_count() == 739 && g.edge_count() == 2851 && iterations == 500 && slowest < 10.0 &&
              identical,
          fmt("%zu nodes, %zu edges, %d iterations; slowest run %.2f s (need < 10); "
              "threads 1/4/auto %s",
              g.node_count(), g.edge_count(), iterations, slowest,
              identical ? "bitwise identical" : "differ")};
}

bool witness_walkable(const TheoryGraph &g, const std::vector<std::string> &w) {
  if (w.size() < 2 || w.front() != w.back()) return false;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    const auto from = g.find_node(w[i]);
    const auto to = g.find_node(w[i + 1]);
    if (!from || !to) return false;
    bool found = false;
    for (const GraphEdge &e : g.edges())
      found |= e.source == *from && e.target == *to && g.kind_of(e).counts_for_hierarchy_validation;
    if (!found) return false;
  }
  return true;
}

Outcome cycle_validation() {
  const TheoryGraph g = load_fixture("import_cycle.json");
  const ValidationReport report = validate(g);
  const bool walkable = report.cycle_witness && witness_walkable(g, *report.cycle_witness);
  const Layout l = run_layout(g, {});
  bool finite = l.positions.size() == g.node_count();
  for (const Vec3 &p : l.positions) finite &= is_finite(p);
  return {!report.import_dag_ok && walkable && finite,
          fmt("import_dag_ok=%s, witness %s, layout %s after %d iterations",
              report.import_dag_ok ? "true" : "false", walkable ? "walkable" : "not walkable",
              finite ? "finite" : "invalid", l.iterations_run)};
}

} // namespace

int main() {
  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
      {"hierarchy direction", hierarchy_direction},
      {"edge-length reduction", edge_length_reduction},
      {"barnes-hut correctness", barnes_hut},
      {"filter oracle equivalence", filter_oracles},
      {"transform invariants", transforms},
      {"cli determinism", cli_determinism},
      {"scale target", scale_target},
      {"cycle validation", cycle_validation},
  };
  int failed = 0;
  for (const auto &[name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception &e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  %-26s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
