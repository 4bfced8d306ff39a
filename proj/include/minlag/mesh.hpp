#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <vector>

#include "minlag/geometry.hpp"
#include "minlag/types.hpp"

namespace mlg {

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NodeTag : std::uint8_t { Interior, Boundary };

const char* to_string(NodeTag tag);

struct MeshParams {
  double h = 0.1;       // quadtree cell size of the finest level
  double h_B = 0.0;     // boundary node spacing
  double delta = 0.0;   // minimum distance of interior nodes to the boundary
  double dtheta = 0.0;  // angular resolution of the direction set
  double r = 0.0;       // stencil search radius

  /// Defaults: h_B = h^hB_exponent, delta = delta_factor*h, r = c_r*sqrt(h),
  /// and dtheta = c_theta*sqrt(h) rounded down so that pi/(2 dtheta) is an
  /// integer (the direction set then contains both coordinate axes).
  static MeshParams from_h(double h, double c_theta = 1.0, double c_r = 2.0, double delta_factor = 0.5,
                           double hB_exponent = 1.5);

  /// Throws MeshError when an invariant is violated.
  void validate() const;
};

/// Uniform bucket grid over a fixed point set.
class SpatialIndex {
 public:
  SpatialIndex() = default;
  SpatialIndex(const std::vector<Point2>& points, double cell_size);

  /// Calls fn(id) for every point with |p - center| <= radius.
  void for_each_in_ball(const Point2& center, double radius, const std::function<void(NodeId)>& fn) const {
    visit_ball(center, radius, fn);
  }
  /// Inlinable form of for_each_in_ball. Buckets of one row are contiguous,
  /// so each row of the ball is a single scan.
  template <typename Fn>
  void visit_ball(const Point2& center, double radius, Fn&& fn) const {
    if (ids_.empty()) return;
    const double r2 = radius * radius;
    const double slack = 1e-9 * cell_;
    const long j0 = std::max(0L, static_cast<long>(std::floor((center.y() - radius - origin_.y()) / cell_)));
    const long j1 = std::min(ny_ - 1, static_cast<long>(std::floor((center.y() + radius - origin_.y()) / cell_)));
    for (long j = j0; j <= j1; ++j) {
      const double y0 = origin_.y() + static_cast<double>(j) * cell_;
      const double y1 = y0 + cell_;
      double dy = center.y() < y0 ? y0 - center.y() : (center.y() > y1 ? center.y() - y1 : 0.0);
      dy = std::max(0.0, dy - slack);
      if (dy * dy > r2) continue;
      const double w = std::sqrt(r2 - dy * dy) + slack;
      const long i0 = std::max(0L, static_cast<long>(std::floor((center.x() - w - origin_.x()) / cell_)));
      const long i1 = std::min(nx_ - 1, static_cast<long>(std::floor((center.x() + w - origin_.x()) / cell_)));
      if (i0 > i1) continue;
      const auto end = static_cast<std::size_t>(start_[static_cast<std::size_t>(j * nx_ + i1 + 1)]);
      for (auto k = static_cast<std::size_t>(start_[static_cast<std::size_t>(j * nx_ + i0)]); k < end; ++k)
        if ((sorted_[k] - center).squaredNorm() <= r2) fn(ids_[k]);
    }
  }
  /// Bucket-level walk over the rows of a ball: fn(lo, hi, gap) per bucket,
  /// where the points are slots [lo, hi) of sorted order and gap is a lower
  /// bound on their distance to center. Buckets may stick out of the ball.
  template <typename Fn>
  void visit_ball_buckets(const Point2& center, double radius, Fn&& fn) const {
    if (ids_.empty()) return;
    const double r2 = radius * radius;
    const double slack = 1e-9 * cell_;
    const long j0 = std::max(0L, static_cast<long>(std::floor((center.y() - radius - origin_.y()) / cell_)));
    const long j1 = std::min(ny_ - 1, static_cast<long>(std::floor((center.y() + radius - origin_.y()) / cell_)));
    for (long j = j0; j <= j1; ++j) {
      const double y0 = origin_.y() + static_cast<double>(j) * cell_;
      double dy = center.y() < y0 ? y0 - center.y() : (center.y() > y0 + cell_ ? center.y() - y0 - cell_ : 0.0);
      dy = std::max(0.0, dy - slack);
      if (dy * dy > r2) continue;
      const double w = std::sqrt(r2 - dy * dy) + slack;
      const long i0 = std::max(0L, static_cast<long>(std::floor((center.x() - w - origin_.x()) / cell_)));
      const long i1 = std::min(nx_ - 1, static_cast<long>(std::floor((center.x() + w - origin_.x()) / cell_)));
      for (long i = i0; i <= i1; ++i) {
        const auto b = static_cast<std::size_t>(j * nx_ + i);
        const auto lo = static_cast<std::size_t>(start_[b]);
        const auto hi = static_cast<std::size_t>(start_[b + 1]);
        if (lo == hi) continue;
        const double x0 = origin_.x() + static_cast<double>(i) * cell_;
        double dx = center.x() < x0 ? x0 - center.x() : (center.x() > x0 + cell_ ? center.x() - x0 - cell_ : 0.0);
        dx = std::max(0.0, dx - slack);
        fn(lo, hi, std::sqrt(dx * dx + dy * dy));
      }
    }
  }
  NodeId sorted_id(std::size_t k) const { return ids_[k]; }
  const Point2& sorted_point(std::size_t k) const { return sorted_[k]; }
  /// Minimum of values over each bucket's points, indexed by the slot range
  /// start; one entry per sorted slot holding its bucket's minimum.
  std::vector<double> bucket_min(const Eigen::VectorXd& values) const;

  /// Ids with |p - center| <= radius, ascending.
  std::vector<NodeId> query(const Point2& center, double radius) const;
  /// Nearest point accepted by `keep` (all points when empty); -1 if none.
  NodeId nearest(const Point2& center, const std::function<bool(NodeId)>& keep = {}) const;

  double cell_size() const { return cell_; }

 private:
  std::array<long, 2> cell_of(const Point2& p) const;

  std::vector<Point2> points_;
  std::vector<Point2> sorted_;  // points_ in bucket order
  Point2 origin_ = Point2::Zero();
  double cell_ = 1.0;
  long nx_ = 0;
  long ny_ = 0;
  std::vector<std::int32_t> start_;
  std::vector<NodeId> ids_;
};

/// Region quadtree over a square root box. Cells meeting the domain are
/// refined down to `max_level`; balance() then enforces the 2:1 rule between
/// edge-adjacent leaves.
class QuadTree {
 public:
  struct Cell {
    Point2 origin;
    double size;
    int level;
    std::int32_t first_child = -1;  // children are contiguous: SW, SE, NW, NE
  };

  QuadTree(const Point2& origin, double size);

  void refine(const std::function<bool(const Cell&)>& should_split, int max_level);
  void balance();

  std::vector<std::int32_t> leaves() const;
  std::int32_t locate(const Point2& p) const;
  /// Largest level difference between edge-adjacent leaves.
  int max_level_jump() const;

  const Cell& cell(std::int32_t id) const { return cells_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return cells_.size(); }
  const Point2& origin() const { return cells_.front().origin; }
  double root_size() const { return cells_.front().size; }

 private:
  void split(std::int32_t id);
  std::array<Point2, 4> edge_probes(const Cell& c) const;

  std::vector<Cell> cells_;
};

struct RealizedMetrics {
  double h = 0.0;       // sup over the closed domain of the distance to the nearest node
  double h_B = 0.0;     // sup over the boundary of the distance to the nearest node
  double delta = 0.0;   // min distance between interior and boundary nodes
};

class QuadMesh {
 public:
  QuadMesh() = default;
  /// Assembles a mesh from explicit nodes; used by build_mesh, importers and tests.
  static QuadMesh from_nodes(std::vector<Point2> nodes, std::vector<NodeTag> tags, const MeshParams& params);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<Point2>& nodes() const { return nodes_; }
  const Point2& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  NodeTag tag(NodeId id) const { return tags_[static_cast<std::size_t>(id)]; }
  bool is_interior(NodeId id) const { return tag(id) == NodeTag::Interior; }
  const std::vector<NodeTag>& tags() const { return tags_; }
  const MeshParams& params() const { return params_; }
  const SpatialIndex& index() const { return index_; }

  std::size_t interior_count() const;
  std::size_t boundary_count() const;
  /// Interior node closest to p (lowest id on ties).
  NodeId nearest_interior(const Point2& p) const;

  // Origin of the finest lattice; sampling in realized_metrics aligns to it.
  Point2 lattice_origin = Point2::Zero();
  // Quadtree diagnostics recorded by build_mesh.
  int tree_levels = 0;
  std::size_t tree_leaves = 0;
  int tree_max_level_jump = 0;

 private:
  std::vector<Point2> nodes_;
  std::vector<NodeTag> tags_;
  MeshParams params_;
  SpatialIndex index_;
};

QuadMesh build_mesh(const ConvexBodyd& domain, const MeshParams& params);

/// All nodes y != node with |y - x| <= radius, ascending by id.
std::vector<NodeId> neighbors_in_ball(const QuadMesh& mesh, NodeId node, double radius);

/// Sampled estimates of the resolution quantities; delta is exact.
RealizedMetrics realized_metrics(const QuadMesh& mesh, const ConvexBodyd& domain);

void write_mesh_csv(const QuadMesh& mesh, const std::filesystem::path& path);
QuadMesh read_mesh_csv(const std::filesystem::path& path, const MeshParams& params);

}  // namespace mlg
