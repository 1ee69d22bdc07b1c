#pragma once

// Force computations written out from their definitions with plain loops over
// all pairs and all edges. They share no code with the engine or the octree.

#include "graph_model.hpp"
#include "layout.hpp"
#include "vec3.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace tgforge::testing {

// k / max(r, r_min) along the unit vector away from each other body.
inline Vec3 oracle_repulsion(const std::vector<Vec3> &pts, std::size_t i, double k, double r_min) {
  double fx = 0, fy = 0, fz = 0;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (j == i) continue;
    const double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y, dz = pts[i].z - pts[j].z;
    const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
    const double m = k / std::max(r, r_min);
    fx += m * dx / r;
    fy += m * dy / r;
    fz += m * dz / r;
  }
  return {fx, fy, fz};
}

inline std::vector<Vec3> oracle_step(const TheoryGraph &g, const std::vector<Vec3> &pos,
                                     const LayoutParams &p, double temperature) {
  const double L = p.ideal_edge_length;
  std::vector<Vec3> next = pos;
  for (std::size_t v = 0; v < pos.size(); ++v) {
    double f[3] = {0, 0, 0};
    for (std::size_t u = 0; u < pos.size(); ++u) {
      if (u == v) continue;
      double diff[3] = {pos[u].x - pos[v].x, pos[u].y - pos[v].y, pos[u].z - pos[v].z};
      const double r = std::sqrt(diff[0] * diff[0] + diff[1] * diff[1] + diff[2] * diff[2]);
      const double d = std::max(r, p.min_distance);
      for (int a = 0; a < 3; ++a) f[a] -= p.k_repel * L * L / d * diff[a] / r;
    }
    for (const GraphEdge &e : g.edges()) {
      if (e.source != v && e.target != v) continue;
      const std::size_t u = e.source == v ? e.target : e.source;
      double diff[3] = {pos[u].x - pos[v].x, pos[u].y - pos[v].y, pos[u].z - pos[v].z};
      const double r = std::sqrt(diff[0] * diff[0] + diff[1] * diff[1] + diff[2] * diff[2]);
      const double d = std::max(r, p.min_distance);
      const EdgeKind &k = g.kind_of(e);
      for (int a = 0; a < 3; ++a) f[a] += k.attraction_weight * p.k_attract * d * d / L * diff[a] / r;
      if (k.hierarchy_weight > 0)
        f[1] += p.k_hierarchy * k.hierarchy_weight * (e.target == v ? 1.0 : -1.0);
    }
    const double mag = std::sqrt(f[0] * f[0] + f[1] * f[1] + f[2] * f[2]);
    const double move = std::min(mag, temperature * L);
    next[v] = {pos[v].x + f[0] / mag * move, pos[v].y + f[1] / mag * move,
               pos[v].z + f[2] / mag * move};
  }
  return next;
}

inline double relative_error(const Vec3 &approx, const Vec3 &exact) {
  return norm(approx - exact) / norm(exact);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace tgforge::testing
