#include "minlag/operators.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace mlg {

const char* to_string(Branch b) {
  switch (b) {
    case Branch::F: return "F";
    case Branch::L: return "L";
    case Branch::H: return "H";
    case Branch::E: return "E";
    case Branch::N: return "N";
  }
  return "?";
}

double second_directional(const SecondDerivStencil& s, const GridFunction& u, NodeId x) {
  const double u0 = u(x);
  return s.a[0] * (u(s.nbr[0]) - u0) + s.a[1] * (u(s.nbr[1]) - u0) + s.a[2] * (u(s.nbr[2]) - u0) +
         s.a[3] * (u(s.nbr[3]) - u0);
}

LambdaExtremes eval_lambda_extremes(const SchemeContext& ctx, const GridFunction& u, NodeId x) {
  const auto st = ctx.stencils.second(x);
  LambdaExtremes out;
  out.lambda1 = std::numeric_limits<double>::infinity();
  out.lambda2 = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < st.size(); ++j) {
    const double d = second_directional(st[j], u, x);
    if (d < out.lambda1) {
      out.lambda1 = d;
      out.argmin = j;
    }
    if (d > out.lambda2) {
      out.lambda2 = d;
      out.argmax = j;
    }
  }
  return out;
}

double eval_F(const SchemeContext& ctx, const GridFunction& u, NodeId x) {
  const auto l = eval_lambda_extremes(ctx, u, x);
  return -std::atan(l.lambda1) - std::atan(l.lambda2);
}

double eval_L(const SchemeContext& ctx, const GridFunction& u, NodeId x) {
  return -eval_lambda_extremes(ctx, u, x).lambda1;
}

EikonalValue eval_E(const SchemeContext& ctx, const GridFunction& u, NodeId x) {
  EikonalValue out;
  out.value = -std::numeric_limits<double>::infinity();
  const Point2& p = ctx.mesh.node(x);
  const double ux = u(x);
  ctx.mesh.index().visit_ball(p, ctx.mesh.params().r, [&](NodeId y) {
    if (y == x) return;
    const double q = (ux - u(y)) / (ctx.mesh.node(y) - p).norm();
    if (q > out.value || (q == out.value && y < out.argmax)) {
      out.value = q;
      out.argmax = y;
    }
  });
  if (out.argmax < 0) throw MeshError("eval_E: node " + std::to_string(x) + " has no neighbor within r");
  return out;
}

EikonalValue eval_E_above(const SchemeContext& ctx, const GridFunction& u, NodeId x, double threshold,
                          const std::vector<double>& bucket_min) {
  EikonalValue out;
  out.value = -std::numeric_limits<double>::infinity();
  const Point2& p = ctx.mesh.node(x);
  const double ux = u(x);
  const double r = ctx.mesh.params().r;
  const double r2 = r * r;
  const auto& index = ctx.mesh.index();
  index.visit_ball_buckets(p, r, [&](std::size_t lo, std::size_t hi, double gap) {
    // every q in the bucket is at most (ux - min)/gap
    const double rise = ux - bucket_min[lo];
    if (threshold >= 0 && (rise <= 0 || rise <= threshold * gap)) return;
    for (std::size_t k = lo; k < hi; ++k) {
      const NodeId y = index.sorted_id(k);
      const double d2 = (index.sorted_point(k) - p).squaredNorm();
      if (y == x || d2 > r2) continue;
      const double q = (ux - u(y)) / std::sqrt(d2);
      if (q > out.value || (q == out.value && y < out.argmax)) {
        out.value = q;
        out.argmax = y;
      }
    }
  });
  if (!(out.value > threshold)) {
    out.value = -std::numeric_limits<double>::infinity();
    out.argmax = -1;
  }
  return out;
}

InteriorHamiltonian eval_H_interior(const SchemeContext& ctx, const GridFunction& u, NodeId x) {
  InteriorHamiltonian out;
  double lap = 0;
  const double u0 = u(x);
  for (int k = 0; k < 2; ++k) {
    const AxisStencil& ax = ctx.stencils.axis(x, k);
    double g = 0;
    for (std::size_t q = 0; q < 4; ++q) g += ax.b[q] * (u(ax.second.nbr[q]) - u0);
    out.gradient(k) = g;
    lap += second_directional(ax.second, u, x);
  }
  out.epsilon = ctx.stencils.epsilon(x);
  out.value = ctx.target.signed_distance(out.gradient) - out.epsilon * lap;
  return out;
}

BoundaryHamiltonian eval_H_boundary(const SchemeContext& ctx, const GridFunction& u, NodeId x) {
  BoundaryHamiltonian out;
  out.value = -std::numeric_limits<double>::infinity();
  const auto st = ctx.stencils.boundary(x);
  const auto& dirs = ctx.stencils.boundary_directions();
  const double u0 = u(x);
  for (std::size_t i = 0; i < st.size(); ++i) {
    const auto& s = st[i];
    double dn = s.c[0] * (u(s.nbr[0]) - u0);
    if (s.nbr[1] >= 0) dn += s.c[1] * (u(s.nbr[1]) - u0);
    const double v = dn - ctx.target.support(dirs[static_cast<std::size_t>(s.direction)]);
    if (v > out.value) {
      out.value = v;
      out.active = i;
    }
  }
  return out;
}

Residual eval_scheme1(const SchemeContext& ctx, const GridFunction& u, double c) {
  const auto n = static_cast<Eigen::Index>(ctx.mesh.size());
  Residual r;
  r.values.resize(n + 1);
  r.branch.resize(static_cast<std::size_t>(n + 1));
  for (NodeId x = 0; x < n; ++x) {
    if (ctx.mesh.is_interior(x)) {
      r.values(x) = eval_F(ctx, u, x) + c;
      r.branch[static_cast<std::size_t>(x)] = Branch::F;
    } else {
      r.values(x) = eval_H_boundary(ctx, u, x).value;
      r.branch[static_cast<std::size_t>(x)] = Branch::H;
    }
  }
  r.values(n) = u(ctx.x0);
  r.branch[static_cast<std::size_t>(n)] = Branch::N;
  return r;
}

Residual eval_scheme2(const SchemeContext& ctx, const GridFunction& u, double c) {
  const auto n = static_cast<Eigen::Index>(ctx.mesh.size());
  Residual r;
  r.values.resize(n);
  r.branch.resize(static_cast<std::size_t>(n));
  const std::vector<double> bmin = ctx.mesh.index().bucket_min(u);
  for (NodeId x = 0; x < n; ++x) {
    double best;
    Branch br;
    if (ctx.mesh.is_interior(x)) {
      const auto l = eval_lambda_extremes(ctx, u, x);
      best = -std::atan(l.lambda1) - std::atan(l.lambda2) + c;
      br = Branch::F;
      if (-l.lambda1 > best) {
        best = -l.lambda1;
        br = Branch::L;
      }
      const double hv = eval_H_interior(ctx, u, x).value;
      if (hv > best) {
        best = hv;
        br = Branch::H;
      }
    } else {
      best = eval_H_boundary(ctx, u, x).value + ctx.kappa * u(x);
      br = Branch::H;
    }
    // E - R only matters where it beats the other branches
    const double ev = eval_E_above(ctx, u, x, best + ctx.R, bmin).value - ctx.R;
    if (ev > best) {
      best = ev;
      br = Branch::E;
    }
    r.values(x) = best;
    r.branch[static_cast<std::size_t>(x)] = br;
  }
  return r;
}

Feasibility eikonal_feasibility(const SchemeContext& ctx, const GridFunction& u) {
  Feasibility f;
  for (NodeId x = 0; x < static_cast<NodeId>(ctx.mesh.size()); ++x) {
    const double excess = eval_E(ctx, u, x).value - ctx.R;
    if (excess > f.max_excess) {
      f.max_excess = excess;
      f.worst = x;
    }
  }
  f.ok = f.max_excess <= 1e-9;
  return f;
}

void write_residual_csv(const Residual& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# schema: minlag-residual v1\n";
  out << "node_id,residual,branch\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < r.values.size(); ++i)
    out << i << ',' << r.values(i) << ',' << to_string(r.branch[static_cast<std::size_t>(i)]) << '\n';
}

}  // namespace mlg
