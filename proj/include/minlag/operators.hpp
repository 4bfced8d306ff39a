#pragma once

#include <filesystem>
#include <limits>
#include <vector>

#include "minlag/geometry.hpp"
#include "minlag/mesh.hpp"
#include "minlag/stencils.hpp"

namespace mlg {

/// Everything the discrete operators read besides the grid function.
struct SchemeContext {
  const QuadMesh& mesh;
  const StencilCache& stencils;
  const ConvexBodyd& target;
  double R;            // gradient bound
  double kappa = 0.0;  // boundary relaxation in the constrained scheme
  NodeId x0 = 0;       // normalization node
};

enum class Branch : std::uint8_t { F, L, H, E, N };

const char* to_string(Branch b);

struct LambdaExtremes {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::size_t argmin = 0;  // index into the direction set
  std::size_t argmax = 0;
};

struct InteriorHamiltonian {
  double value = 0.0;
  Vector2 gradient = Vector2::Zero();  // centered discrete gradient
  double epsilon = 0.0;
};

struct EikonalValue {
  double value = 0.0;
  NodeId argmax = -1;
};

struct BoundaryHamiltonian {
  double value = 0.0;
  std::size_t active = 0;  // index into StencilCache::boundary(x)
};

struct Residual {
  Eigen::VectorXd values;
  std::vector<Branch> branch;
  double sup_norm() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
};

struct Feasibility {
  bool ok = true;
  NodeId worst = -1;
  double max_excess = -std::numeric_limits<double>::infinity();  // max over nodes of E^h - R
};

double second_directional(const SecondDerivStencil& s, const GridFunction& u, NodeId x);

LambdaExtremes eval_lambda_extremes(const SchemeContext& ctx, const GridFunction& u, NodeId x);
/// -arctan(lambda1) - arctan(lambda2).
double eval_F(const SchemeContext& ctx, const GridFunction& u, NodeId x);
/// -lambda1.
double eval_L(const SchemeContext& ctx, const GridFunction& u, NodeId x);
/// max over nodes y in the search ball of (u(x) - u(y)) / |x - y|.
EikonalValue eval_E(const SchemeContext& ctx, const GridFunction& u, NodeId x);
/// eval_E when only values above `threshold` matter: exact if E > threshold,
/// otherwise value = -inf. `bucket_min` is mesh.index().bucket_min(u); whole
/// buckets are skipped when their minimum proves they stay below threshold.
EikonalValue eval_E_above(const SchemeContext& ctx, const GridFunction& u, NodeId x, double threshold,
                          const std::vector<double>& bucket_min);
/// Lax-Friedrichs: H(D_x u, D_y u) - eps (D_xx u + D_yy u), H the signed
/// distance to the target boundary.
InteriorHamiltonian eval_H_interior(const SchemeContext& ctx, const GridFunction& u, NodeId x);
/// max over admissible n of D_n u(x) - H*(n).
BoundaryHamiltonian eval_H_boundary(const SchemeContext& ctx, const GridFunction& u, NodeId x);

/// Rows: interior F + c, boundary H, then u(x0). Length size()+1.
Residual eval_scheme1(const SchemeContext& ctx, const GridFunction& u, double c);
/// Rows: interior max{F + c, L, H, E - R}, boundary max{H + kappa u, E - R}.
/// Length size(); ties resolve in the order F, L, H, E.
Residual eval_scheme2(const SchemeContext& ctx, const GridFunction& u, double c);

/// E^h <= R + 1e-9 at every node.
Feasibility eikonal_feasibility(const SchemeContext& ctx, const GridFunction& u);

void write_residual_csv(const Residual& r, const std::filesystem::path& path);

}  // namespace mlg
