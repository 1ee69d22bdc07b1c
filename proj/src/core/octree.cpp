#include "octree.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tgforge {

Vec3 RepulsionKernel::force(const Vec3 &query, const Vec3 &source, double mass,
                            double tie_break_sign) const {
  const Vec3 away = query - source;
  const double r = norm(away);
  const double magnitude = mass * strength / std::max(r, min_distance);
  if (r > 0.0) return away * (magnitude / r);
  return {tie_break_sign * magnitude, 0.0, 0.0};
}

Box3 Octree::child_bounds(const Box3 &parent, int octant) {
  const Vec3 c = parent.center();
  Box3 b;
  for (int axis = 0; axis < 3; ++axis) {
    const bool high = (octant >> axis) & 1;
    b.min[axis] = high ? c[axis] : parent.min[axis];
    b.max[axis] = high ? parent.max[axis] : c[axis];
  }
  return b;
}

Octree::Octree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  if (points_.empty()) throw Error(ErrorCode::Input, "cannot index an empty point set");
  if (points_.size() > std::numeric_limits<std::uint32_t>::max())
    throw Error(ErrorCode::Input, "too many points for the spatial index");

  Box3 box{points_[0], points_[0]};
  double scale = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Vec3 &p = points_[i];
    if (!is_finite(p))
      throw Error(ErrorCode::Input, "point " + std::to_string(i) + " has a non-finite coordinate",
                  std::to_string(i));
    for (int a = 0; a < 3; ++a) {
      box.min[a] = std::min(box.min[a], p[a]);
      box.max[a] = std::max(box.max[a], p[a]);
      scale = std::max(scale, std::abs(p[a]));
    }
  }
  const double margin = 1e-9 * std::max(box.longest_side(), scale);
  box.min -= Vec3{margin, margin, margin};
  box.max += Vec3{margin, margin, margin};

  items_.resize(points_.size());
  for (std::uint32_t i = 0; i < items_.size(); ++i) items_[i] = i;
  scratch_.resize(items_.size());
  cells_.reserve(2 * points_.size());
  build(box, 0, static_cast<std::uint32_t>(items_.size()), 0);
  scratch_ = {};
}

std::int32_t Octree::build(Box3 bounds, std::uint32_t first, std::uint32_t count, int depth) {
  const auto index = static_cast<std::int32_t>(cells_.size());
  cells_.push_back({});
  cells_[index].bounds = bounds;
  cells_[index].depth = depth;
  cells_[index].mass = static_cast<double>(count);

  if (count == 1 || depth == max_depth) {
    Vec3 sum;
    for (std::uint32_t k = first; k < first + count; ++k) sum += points_[items_[k]];
    cells_[index].center_of_mass = sum * (1.0 / count);
    cells_[index].first = first;
    cells_[index].count = count;
    return index;
  }

  // Stable counting sort of this cell's items by octant.
  const Vec3 c = bounds.center();
  std::array<std::uint32_t, 9> offsets{};
  for (std::uint32_t k = first; k < first + count; ++k)
    ++offsets[octant(points_[items_[k]], c) + 1];
  for (int o = 0; o < 8; ++o) offsets[o + 1] += offsets[o];
  std::array<std::uint32_t, 8> cursor;
  std::copy_n(offsets.begin(), 8, cursor.begin());
  for (std::uint32_t k = first; k < first + count; ++k) {
    const std::uint32_t item = items_[k];
    scratch_[first + cursor[octant(points_[item], c)]++] = item;
  }
  std::copy_n(scratch_.begin() + first, count, items_.begin() + first);

  Vec3 weighted;
  for (int o = 0; o < 8; ++o) {
    const std::uint32_t n = offsets[o + 1] - offsets[o];
    if (n == 0) continue;
    const std::int32_t child = build(child_bounds(bounds, o), first + offsets[o], n, depth + 1);
    cells_[index].children[o] = child;
    weighted += cells_[child].center_of_mass * cells_[child].mass;
  }
  cells_[index].center_of_mass = weighted * (1.0 / cells_[index].mass);
  return index;
}

int Octree::depth() const {
  int d = 0;
  for (const Cell &c : cells_) d = std::max(d, c.depth);
  return d;
}

Vec3 Octree::approx_repulsion(const Vec3 &query, double theta, const RepulsionKernel &kernel,
                              std::optional<std::uint32_t> exclude) const {
  Vec3 total;
  // Depth is bounded by max_depth and each level pushes at most 8 entries.
  std::array<std::int32_t, 8 * (max_depth + 1)> stack;
  std::size_t top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Cell &cell = cells_[stack[--top]];
    if (cell.is_leaf()) {
      for (std::uint32_t k = cell.first; k < cell.first + cell.count; ++k) {
        const std::uint32_t item = items_[k];
        if (exclude && item == *exclude) continue;
        const double sign = (exclude && *exclude < item) ? -1.0 : 1.0;
        total += kernel.force(query, points_[item], 1.0, sign);
      }
      continue;
    }
    const double r = distance(query, cell.center_of_mass);
    if (cell.bounds.longest_side() < theta * r && !cell.bounds.contains(query)) {
      total += kernel.force(query, cell.center_of_mass, cell.mass, 1.0);
      continue;
    }
    for (int o = 7; o >= 0; --o)
      if (cell.children[o] != no_child) stack[top++] = cell.children[o];
  }
  return total;
}

Vec3 direct_repulsion(std::span<const Vec3> points, std::size_t index,
                      const RepulsionKernel &kernel) {
  Vec3 total;
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (j == index) continue;
    total += kernel.force(points[index], points[j], 1.0, index < j ? -1.0 : 1.0);
  }
  return total;
}

} // namespace tgforge
