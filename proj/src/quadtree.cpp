#include <algorithm>
#include <cmath>
#include <limits>

#include "minlag/mesh.hpp"

namespace mlg {

SpatialIndex::SpatialIndex(const std::vector<Point2>& points, double cell_size) : points_(points), cell_(cell_size) {
  if (!(cell_size > 0)) throw MeshError("SpatialIndex: cell size must be positive");
  if (points.empty()) return;
  Point2 lo = points.front();
  Point2 hi = lo;
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  origin_ = lo;
  nx_ = static_cast<long>(std::floor((hi.x() - lo.x()) / cell_)) + 1;
  ny_ = static_cast<long>(std::floor((hi.y() - lo.y()) / cell_)) + 1;
  // Counting sort by bucket keeps ids ascending inside each bucket.
  start_.assign(static_cast<std::size_t>(nx_ * ny_ + 1), 0);
  std::vector<long> bucket(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = cell_of(points[i]);
    bucket[i] = c[1] * nx_ + c[0];
    ++start_[static_cast<std::size_t>(bucket[i] + 1)];
  }
  for (std::size_t b = 1; b < start_.size(); ++b) start_[b] += start_[b - 1];
  ids_.resize(points.size());
  std::vector<std::int32_t> fill(start_.begin(), start_.end() - 1);
  for (std::size_t i = 0; i < points.size(); ++i)
    ids_[static_cast<std::size_t>(fill[static_cast<std::size_t>(bucket[i])]++)] = static_cast<NodeId>(i);
  sorted_.resize(points.size());
  for (std::size_t k = 0; k < ids_.size(); ++k) sorted_[k] = points_[static_cast<std::size_t>(ids_[k])];
}

std::array<long, 2> SpatialIndex::cell_of(const Point2& p) const {
  const long i = static_cast<long>(std::floor((p.x() - origin_.x()) / cell_));
  const long j = static_cast<long>(std::floor((p.y() - origin_.y()) / cell_));
  return {std::clamp(i, 0L, nx_ - 1), std::clamp(j, 0L, ny_ - 1)};
}

std::vector<double> SpatialIndex::bucket_min(const Eigen::VectorXd& values) const {
  std::vector<double> out(ids_.size());
  for (std::size_t b = 0; b + 1 < start_.size(); ++b) {
    const auto lo = static_cast<std::size_t>(start_[b]);
    const auto hi = static_cast<std::size_t>(start_[b + 1]);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = lo; k < hi; ++k) m = std::min(m, values(ids_[k]));
    std::fill(out.begin() + static_cast<long>(lo), out.begin() + static_cast<long>(hi), m);
  }
  return out;
}

std::vector<NodeId> SpatialIndex::query(const Point2& center, double radius) const {
  std::vector<NodeId> out;
  visit_ball(center, radius, [&out](NodeId id) { out.push_back(id); });
  std::sort(out.begin(), out.end());
  return out;
}

NodeId SpatialIndex::nearest(const Point2& center, const std::function<bool(NodeId)>& keep) const {
  if (ids_.empty()) return -1;
  const double extent = cell_ * static_cast<double>(std::max(nx_, ny_) + 2) +
                        (center - origin_).cwiseAbs().maxCoeff();
  for (double radius = cell_; ; radius *= 2) {
    NodeId best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    visit_ball(center, radius, [&](NodeId id) {
      if (keep && !keep(id)) return;
      const double d = (points_[static_cast<std::size_t>(id)] - center).squaredNorm();
      if (d < best_d || (d == best_d && id < best)) {
        best_d = d;
        best = id;
      }
    });
    if (best >= 0) return best;
    if (radius > 2 * extent) return -1;
  }
}

QuadTree::QuadTree(const Point2& origin, double size) {
  if (!(size > 0)) throw MeshError("QuadTree: root size must be positive");
  cells_.push_back(Cell{origin, size, 0, -1});
}

void QuadTree::split(std::int32_t id) {
  const Cell parent = cells_[static_cast<std::size_t>(id)];
  if (parent.first_child >= 0) return;
  const double half = parent.size / 2;
  const auto first = static_cast<std::int32_t>(cells_.size());
  for (int k = 0; k < 4; ++k) {
    const Point2 o = parent.origin + Point2((k & 1) * half, (k >> 1) * half);
    cells_.push_back(Cell{o, half, parent.level + 1, -1});
  }
  cells_[static_cast<std::size_t>(id)].first_child = first;
}

void QuadTree::refine(const std::function<bool(const Cell&)>& should_split, int max_level) {
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const std::int32_t id = stack.back();
    stack.pop_back();
    const Cell c = cells_[static_cast<std::size_t>(id)];
    if (c.level >= max_level) continue;
    if (c.first_child < 0) {
      if (!should_split(c)) continue;
      split(id);
    }
    const std::int32_t first = cells_[static_cast<std::size_t>(id)].first_child;
    for (int k = 3; k >= 0; --k) stack.push_back(first + k);
  }
}

std::int32_t QuadTree::locate(const Point2& p) const {
  const Cell& root = cells_.front();
  if (p.x() < root.origin.x() || p.y() < root.origin.y() || p.x() > root.origin.x() + root.size ||
      p.y() > root.origin.y() + root.size)
    return -1;
  std::int32_t id = 0;
  while (cells_[static_cast<std::size_t>(id)].first_child >= 0) {
    const Cell& c = cells_[static_cast<std::size_t>(id)];
    const double half = c.size / 2;
    const int kx = p.x() >= c.origin.x() + half ? 1 : 0;
    const int ky = p.y() >= c.origin.y() + half ? 1 : 0;
    id = c.first_child + kx + 2 * ky;
  }
  return id;
}

std::array<Point2, 4> QuadTree::edge_probes(const Cell& c) const {
  const double eps = 1e-3 * c.size;
  const double half = c.size / 2;
  const Point2 mid = c.origin + Point2(half, half);
  return {mid + Point2(half + eps, 0), mid - Point2(half + eps, 0), mid + Point2(0, half + eps),
          mid - Point2(0, half + eps)};
}

std::vector<std::int32_t> QuadTree::leaves() const {
  std::vector<std::int32_t> out;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const std::int32_t id = stack.back();
    stack.pop_back();
    const Cell& c = cells_[static_cast<std::size_t>(id)];
    if (c.first_child < 0) {
      out.push_back(id);
    } else {
      for (int k = 3; k >= 0; --k) stack.push_back(c.first_child + k);
    }
  }
  return out;
}

void QuadTree::balance() {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const std::int32_t id : leaves()) {
      const Cell c = cells_[static_cast<std::size_t>(id)];
      for (const Point2& probe : edge_probes(c)) {
        const std::int32_t nb = locate(probe);
        if (nb >= 0 && cells_[static_cast<std::size_t>(nb)].level < c.level - 1) {
          split(nb);
          changed = true;
        }
      }
    }
  }
}

int QuadTree::max_level_jump() const {
  int jump = 0;
  for (const std::int32_t id : leaves()) {
    const Cell& c = cell(id);
    for (const Point2& probe : edge_probes(c)) {
      const std::int32_t nb = locate(probe);
      if (nb >= 0) jump = std::max(jump, std::abs(cell(nb).level - c.level));
    }
  }
  return jump;
}

}  // namespace mlg
