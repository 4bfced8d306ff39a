#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "minlag/geometry.hpp"
#include "minlag/mesh.hpp"
#include "minlag/stencil_coefficients.hpp"

namespace mlg {

/// Unit directions (cos(j dtheta), sin(j dtheta)), j = 1..count.
struct DirectionSet {
  double dtheta = 0.0;
  std::vector<Vector2> directions;

  /// floor(pi/dtheta) directions spanning a half turn; enough for second
  /// derivatives since nu and -nu give the same value.
  static DirectionSet half_turn(double dtheta);
  /// Twice as many directions covering the full circle.
  static DirectionSet full_turn(double dtheta);

  std::size_t size() const { return directions.size(); }
  const Vector2& operator[](std::size_t j) const { return directions[j]; }
};

struct SecondDerivStencil {
  std::array<NodeId, 4> nbr{};
  std::array<double, 4> a{};
};

/// Stencil along a coordinate axis: second derivative plus the centered
/// first derivative built from the same four neighbors.
struct AxisStencil {
  SecondDerivStencil second;
  std::array<double, 4> b{};
};

/// D_n u(x0) = sum c_i (u(x_i) - u(x0)) at a boundary node; nbr[1] = -1
/// when a single neighbor lies exactly on the -n ray.
struct BoundaryDirStencil {
  std::int32_t direction = 0;  // index into StencilCache::boundary_directions()
  std::array<NodeId, 2> nbr{-1, -1};
  std::array<double, 2> c{};
};

struct StencilOptions {
  double boundary_radius_factor = 3.0;  // C_b: triangle neighbors within C_b h
};

/// Neighbor in each quadrant of the (nu, nu_perp) frame minimizing sin^2 phi
/// within radius r (ties: smaller rho, then smaller id). Throws
/// StencilError(EmptyQuadrant) if a quadrant has no node.
std::array<NodeId, 4> select_quadrant_neighbors(const QuadMesh& mesh, NodeId x0, const Vector2& nu, double r);

/// Pair of nodes within radius of boundary node x0 whose cone contains -n,
/// minimizing the truncation proxy sum |c_i| |x_i - x0|^2 (ties by ids).
/// Throws StencilError(NoValidTriangle) when none exists.
BoundaryDirStencil find_boundary_triangle(const QuadMesh& mesh, NodeId x0, const Vector2& n, double radius);

/// All stencils of a mesh, built once.
class StencilCache {
 public:
  static StencilCache build(const QuadMesh& mesh, const ConvexBodyd& domain, const StencilOptions& options = {});

  const DirectionSet& directions() const { return directions_; }
  const DirectionSet& boundary_directions() const { return boundary_directions_; }

  std::span<const SecondDerivStencil> second(NodeId x) const {
    return {second_.data() + static_cast<std::size_t>(slot(x)) * directions_.size(), directions_.size()};
  }
  const AxisStencil& axis(NodeId x, int k) const { return axis_[2 * static_cast<std::size_t>(slot(x)) + static_cast<std::size_t>(k)]; }
  /// Lax-Friedrichs viscosity max |b_j| / a_j over both axis stencils.
  double epsilon(NodeId x) const { return epsilon_[static_cast<std::size_t>(slot(x))]; }
  std::span<const BoundaryDirStencil> boundary(NodeId x) const {
    const auto s = static_cast<std::size_t>(slot(x));
    return {boundary_.data() + boundary_start_[s], boundary_start_[s + 1] - boundary_start_[s]};
  }
  const Vector2& boundary_normal(NodeId x) const { return normals_[static_cast<std::size_t>(slot(x))]; }
  /// Directions n with n.n_x > 0 at x that were dropped because -n leaves the domain.
  std::size_t skipped_directions() const { return skipped_; }

 private:
  std::int32_t slot(NodeId x) const { return slot_[static_cast<std::size_t>(x)]; }

  DirectionSet directions_;
  DirectionSet boundary_directions_;
  std::vector<std::int32_t> slot_;  // interior or boundary ordinal of each node
  std::vector<SecondDerivStencil> second_;
  std::vector<AxisStencil> axis_;
  std::vector<double> epsilon_;
  std::vector<BoundaryDirStencil> boundary_;
  std::vector<std::size_t> boundary_start_;
  std::vector<Vector2> normals_;
  std::size_t skipped_ = 0;
};

/// Builds the axis stencil for direction nu at x0 (nu must be a unit vector).
AxisStencil build_axis_stencil(const QuadMesh& mesh, NodeId x0, const Vector2& nu, double r);

void write_stencil_csv(const QuadMesh& mesh, const StencilCache& cache, const std::filesystem::path& path);

}  // namespace mlg
