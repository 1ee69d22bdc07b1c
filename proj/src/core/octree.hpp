#pragma once

#include "vec3.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace tgforge {

/// Repulsion between two bodies at distance r: strength / max(r, min_distance),
/// directed away from the other body. The layout engine uses
/// strength = k_repel * L^2.
struct RepulsionKernel {
  double strength = 1.0;
  double min_distance = 1e-3;

  /// Force on a body at `query` exerted by `mass` units at `source`.
  /// Coincident bodies push along +x or -x depending on `tie_break_sign`.
  Vec3 force(const Vec3 &query, const Vec3 &source, double mass, double tie_break_sign) const;
};

/// Barnes-Hut octree over a fixed point set. Leaves hold one point except at
/// max_depth, where all remaining points of that cell are kept together.
class Octree {
public:
  static constexpr int max_depth = 32;
  static constexpr std::int32_t no_child = -1;

  struct Cell {
    Box3 bounds;
    double mass = 0.0;
    Vec3 center_of_mass;
    std::array<std::int32_t, 8> children{no_child, no_child, no_child, no_child,
                                         no_child, no_child, no_child, no_child};
    // Range into items() for leaves; empty for internal cells.
    std::uint32_t first = 0;
    std::uint32_t count = 0;
    int depth = 0;

    bool is_leaf() const { return count > 0; }
  };

  /// Throws Error(Input) naming the first non-finite coordinate, or when
  /// `points` is empty.
  explicit Octree(std::span<const Vec3> points);

  const Cell &root() const { return cells_.front(); }
  std::span<const Cell> cells() const { return cells_; }
  std::span<const std::uint32_t> items() const { return items_; }
  std::span<const Vec3> points() const { return points_; }
  std::size_t point_count() const { return points_.size(); }
  int depth() const;

  /// Barnes-Hut estimate of the total repulsion on `query`. A cell acts as a
  /// single body when (longest side / distance to its centre of mass) < theta
  /// and `query` lies outside it; theta = 0 therefore sums every pair exactly.
  /// `exclude` names the point index of the query body, if it is indexed.
  Vec3 approx_repulsion(const Vec3 &query, double theta, const RepulsionKernel &kernel,
                        std::optional<std::uint32_t> exclude = std::nullopt) const;

  /// Octant of p relative to centre c: bit 0 = x, bit 1 = y, bit 2 = z.
  static int octant(const Vec3 &p, const Vec3 &c) {
    return (p.x >= c.x ? 1 : 0) | (p.y >= c.y ? 2 : 0) | (p.z >= c.z ? 4 : 0);
  }
  static Box3 child_bounds(const Box3 &parent, int octant);

private:
  std::int32_t build(Box3 bounds, std::uint32_t first, std::uint32_t count, int depth);

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> items_;
  std::vector<Cell> cells_;
  std::vector<std::uint32_t> scratch_;
};

/// Exact O(n^2) counterpart of Octree::approx_repulsion for body `index`.
Vec3 direct_repulsion(std::span<const Vec3> points, std::size_t index,
                      const RepulsionKernel &kernel);

} // namespace tgforge
