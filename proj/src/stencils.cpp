#include "minlag/stencils.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <tuple>

namespace mlg {

const char* to_string(StencilErrorKind kind) {
  switch (kind) {
    case StencilErrorKind::EmptyQuadrant: return "EmptyQuadrant";
    case StencilErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case StencilErrorKind::ConvexHullViolation: return "ConvexHullViolation";
    case StencilErrorKind::NoValidTriangle: return "NoValidTriangle";
  }
  return "unknown";
}

namespace {

Vector2 unit_direction(double angle) {
  Vector2 v(std::cos(angle), std::sin(angle));
  for (int k = 0; k < 2; ++k)
    if (std::abs(v(k)) < 1e-15) v(k) = 0;
  return v;
}

constexpr double two_pi = 2 * std::numbers::pi;

double angle_of(const Vector2& v) {
  double a = std::atan2(v.y(), v.x());
  if (a < 0) a += two_pi;
  return a;
}

// Ball members bucketed by polar angle, so that the best neighbor of a
// quadrant can be searched outward from its axis.
struct AngularBins {
  int count = 0;
  std::vector<std::size_t> start;
  std::vector<std::size_t> items;

  int bin(double angle) const {
    const int b = static_cast<int>(angle / two_pi * count);
    return std::clamp(b, 0, count - 1);
  }
};

struct Ball {
  std::vector<NodeId> ids;
  std::vector<Vector2> d;
  AngularBins bins;
};

Ball gather(const QuadMesh& mesh, NodeId x0, double radius, bool with_bins = false) {
  Ball ball;
  ball.ids = neighbors_in_ball(mesh, x0, radius);
  ball.d.reserve(ball.ids.size());
  for (const NodeId id : ball.ids) ball.d.push_back(mesh.node(id) - mesh.node(x0));
  if (with_bins) {
    AngularBins& b = ball.bins;
    b.count = static_cast<int>(std::clamp<std::size_t>(ball.d.size() / 4, 16, 1024));
    std::vector<int> which(ball.d.size(), -1);
    b.start.assign(static_cast<std::size_t>(b.count) + 1, 0);
    for (std::size_t i = 0; i < ball.d.size(); ++i) {
      if (ball.ids[i] == x0) continue;
      which[i] = b.bin(angle_of(ball.d[i]));
      ++b.start[static_cast<std::size_t>(which[i]) + 1];
    }
    for (int k = 0; k < b.count; ++k) b.start[static_cast<std::size_t>(k) + 1] += b.start[static_cast<std::size_t>(k)];
    b.items.resize(b.start.back());
    std::vector<std::size_t> fill(b.start.begin(), b.start.end() - 1);
    for (std::size_t i = 0; i < ball.d.size(); ++i)
      if (which[i] >= 0) b.items[fill[static_cast<std::size_t>(which[i])]++] = i;
  }
  return ball;
}

using SelectKey = std::tuple<double, double, NodeId>;

constexpr SelectKey no_key{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                           std::numeric_limits<NodeId>::max()};

// Offers ball member i to its quadrant's running minimum of (sin^2, rho^2, id).
void offer(const Ball& ball, std::size_t i, const Vector2& nu, std::array<SelectKey, 4>& key,
           std::array<std::size_t, 4>& best, int only = -1) {
  double C, S;
  polar_components(ball.d[i], nu, C, S);
  const int q = quadrant_of(C, S);
  if (q < 0 || (only >= 0 && q != only)) return;
  const double rho2 = C * C + S * S;
  const SelectKey k{S * S / rho2, rho2, ball.ids[i]};
  if (k < key[static_cast<std::size_t>(q)]) {
    key[static_cast<std::size_t>(q)] = k;
    best[static_cast<std::size_t>(q)] = i;
  }
}

void check_quadrants(const std::array<SelectKey, 4>& key, NodeId x0) {
  for (int q = 0; q < 4; ++q)
    if (std::get<2>(key[static_cast<std::size_t>(q)]) == std::numeric_limits<NodeId>::max())
      throw StencilError(StencilErrorKind::EmptyQuadrant, "node " + std::to_string(x0) + ": quadrant " +
                                                              std::to_string(q + 1) + " has no neighbor within r");
}

// Local indices into the ball, one per quadrant, by exhaustive search.
std::array<std::size_t, 4> select_in_ball(const Ball& ball, const Vector2& nu, NodeId x0) {
  std::array<std::size_t, 4> best{};
  std::array<SelectKey, 4> key;
  key.fill(no_key);
  for (std::size_t i = 0; i < ball.d.size(); ++i) offer(ball, i, nu, key, best);
  check_quadrants(key, x0);
  return best;
}

// Same selection using the angular bins. sin^2 is monotone in the polar
// angle within a quadrant, so the minimizer lies in the first bins holding
// quadrant members when walking away from the quadrant's sin = 0 edge. Two
// extra bins on each side absorb rounding near bin edges.
std::array<std::size_t, 4> select_in_bins(const Ball& ball, const Vector2& nu, NodeId x0) {
  const AngularBins& b = ball.bins;
  const double alpha = angle_of(nu);
  std::array<std::size_t, 4> best{};
  std::array<SelectKey, 4> key;
  key.fill(no_key);
  for (int q = 0; q < 4; ++q) {
    const double edge = (q == 0 || q == 3) ? alpha : std::fmod(alpha + std::numbers::pi, two_pi);
    const int step = (q == 0 || q == 2) ? 1 : -1;
    const int b0 = b.bin(edge) - 2 * step;
    int found = -1;
    for (int k = 0; k < b.count + 4; ++k) {
      const int bin = ((b0 + step * k) % b.count + b.count) % b.count;
      for (std::size_t t = b.start[static_cast<std::size_t>(bin)]; t < b.start[static_cast<std::size_t>(bin) + 1]; ++t)
        offer(ball, b.items[t], nu, key, best, q);
      if (found < 0 && std::get<2>(key[static_cast<std::size_t>(q)]) != std::numeric_limits<NodeId>::max()) found = k;
      if (found >= 0 && k >= found + 2) break;
    }
  }
  check_quadrants(key, x0);
  return best;
}

SecondDerivStencil second_in_ball(const Ball& ball, const Vector2& nu, NodeId x0) {
  const auto sel = ball.bins.count > 0 ? select_in_bins(ball, nu, x0) : select_in_ball(ball, nu, x0);
  SecondDerivStencil s;
  std::array<Vector2, 4> d;
  for (std::size_t q = 0; q < 4; ++q) {
    s.nbr[q] = ball.ids[sel[q]];
    d[q] = ball.d[sel[q]];
  }
  s.a = second_deriv_coefficients(d, nu);
  return s;
}

AxisStencil axis_in_ball(const QuadMesh& mesh, const Ball& ball, const Vector2& nu, NodeId x0) {
  AxisStencil s;
  s.second = second_in_ball(ball, nu, x0);
  std::array<Vector2, 4> d;
  for (std::size_t q = 0; q < 4; ++q) d[q] = mesh.node(s.second.nbr[q]) - mesh.node(x0);
  // Forward difference from the q1/q4 pair, backward from q2/q3; centered is their mean.
  const auto fwd = first_deriv_coefficients(d[0], d[3], nu);
  const auto bwd = first_deriv_coefficients(d[1], d[2], nu);
  s.b = {fwd[0] / 2, bwd[0] / 2, bwd[1] / 2, fwd[1] / 2};
  return s;
}

BoundaryDirStencil triangle_in_ball(const Ball& ball, const Vector2& n, NodeId x0) {
  const std::size_t m = ball.d.size();
  std::vector<double> h(m), k(m);
  for (std::size_t i = 0; i < m; ++i) polar_components(ball.d[i], n, h[i], k[i]);

  double best_cost = std::numeric_limits<double>::infinity();
  std::size_t bi = m, bj = m;
  for (std::size_t i = 0; i < m; ++i) {
    if (h[i] > 0) continue;
    if (k[i] == 0) {
      if (h[i] < 0 && -h[i] < best_cost) {
        best_cost = -h[i];
        bi = i;
        bj = m;
      }
      continue;
    }
    if (k[i] < 0) continue;
    for (std::size_t j = 0; j < m; ++j) {
      if (h[j] > 0 || k[j] >= 0) continue;
      const double den = h[i] * k[j] - h[j] * k[i];
      const double scale2 = std::max(ball.d[i].squaredNorm(), ball.d[j].squaredNorm());
      if (!(den > 1e-14 * scale2)) continue;
      const double ai = -k[j] / den;
      const double aj = k[i] / den;
      const double cost = ai * ball.d[i].squaredNorm() + aj * ball.d[j].squaredNorm();
      if (cost < best_cost) {
        best_cost = cost;
        bi = i;
        bj = j;
      }
    }
  }
  if (bi == m)
    throw StencilError(StencilErrorKind::NoValidTriangle,
                       "boundary node " + std::to_string(x0) + ": no neighbor pair brackets the inward ray");
  BoundaryDirStencil s;
  s.nbr[0] = ball.ids[bi];
  if (bj == m) {
    s.c = {1.0 / h[bi], 0.0};
  } else {
    s.nbr[1] = ball.ids[bj];
    s.c = boundary_direction_coefficients(ball.d[bi], ball.d[bj], n);
  }
  return s;
}

}  // namespace

DirectionSet DirectionSet::half_turn(double dtheta) {
  if (!(dtheta > 0)) throw std::invalid_argument("DirectionSet: dtheta must be positive");
  DirectionSet set;
  set.dtheta = dtheta;
  const auto m = static_cast<int>(std::floor(std::numbers::pi / dtheta + 1e-9));
  for (int j = 1; j <= m; ++j) set.directions.push_back(unit_direction(j * dtheta));
  return set;
}

DirectionSet DirectionSet::full_turn(double dtheta) {
  DirectionSet set;
  set.dtheta = dtheta;
  const auto m = static_cast<int>(std::floor(std::numbers::pi / dtheta + 1e-9));
  for (int j = 1; j <= 2 * m; ++j) set.directions.push_back(unit_direction(j * dtheta));
  return set;
}

std::array<NodeId, 4> select_quadrant_neighbors(const QuadMesh& mesh, NodeId x0, const Vector2& nu, double r) {
  const Ball ball = gather(mesh, x0, r);
  const auto sel = select_in_ball(ball, nu, x0);
  return {ball.ids[sel[0]], ball.ids[sel[1]], ball.ids[sel[2]], ball.ids[sel[3]]};
}

AxisStencil build_axis_stencil(const QuadMesh& mesh, NodeId x0, const Vector2& nu, double r) {
  return axis_in_ball(mesh, gather(mesh, x0, r), nu, x0);
}

BoundaryDirStencil find_boundary_triangle(const QuadMesh& mesh, NodeId x0, const Vector2& n, double radius) {
  return triangle_in_ball(gather(mesh, x0, radius), n, x0);
}

StencilCache StencilCache::build(const QuadMesh& mesh, const ConvexBodyd& domain, const StencilOptions& options) {
  const MeshParams& p = mesh.params();
  StencilCache cache;
  cache.directions_ = DirectionSet::half_turn(p.dtheta);
  cache.boundary_directions_ = DirectionSet::full_turn(p.dtheta);
  const std::size_t m = cache.directions_.size();

  cache.slot_.resize(mesh.size());
  std::int32_t n_int = 0, n_bdy = 0;
  for (NodeId x = 0; x < static_cast<NodeId>(mesh.size()); ++x)
    cache.slot_[static_cast<std::size_t>(x)] = mesh.is_interior(x) ? n_int++ : n_bdy++;

  cache.second_.resize(static_cast<std::size_t>(n_int) * m);
  cache.axis_.resize(2 * static_cast<std::size_t>(n_int));
  cache.epsilon_.resize(static_cast<std::size_t>(n_int));
  cache.normals_.resize(static_cast<std::size_t>(n_bdy));
  cache.boundary_start_.assign(1, 0);

  const Vector2 axes[2] = {Vector2(1, 0), Vector2(0, 1)};
  const double tri_radius = options.boundary_radius_factor * p.h;
  const double probe = 2 * p.h_B;
  for (NodeId x = 0; x < static_cast<NodeId>(mesh.size()); ++x) {
    const auto s = static_cast<std::size_t>(cache.slot_[static_cast<std::size_t>(x)]);
    if (mesh.is_interior(x)) {
      const Ball ball = gather(mesh, x, p.r, true);
      for (std::size_t j = 0; j < m; ++j) cache.second_[s * m + j] = second_in_ball(ball, cache.directions_[j], x);
      double eps = 0;
      for (int k = 0; k < 2; ++k) {
        AxisStencil& ax = cache.axis_[2 * s + static_cast<std::size_t>(k)];
        ax = axis_in_ball(mesh, ball, axes[k], x);
        for (std::size_t q = 0; q < 4; ++q) {
          const double a = ax.second.a[q];
          const double b = std::abs(ax.b[q]);
          if (a > 0) {
            eps = std::max(eps, b / a);
          } else if (b > 0) {
            throw StencilError(StencilErrorKind::DegenerateDenominator,
                               "node " + std::to_string(x) + ": first-derivative weight without diffusion");
          }
        }
      }
      cache.epsilon_[s] = eps;
    } else {
      const Vector2 nx = domain.outward_normal(mesh.node(x));
      cache.normals_[s] = nx;
      const Ball ball = gather(mesh, x, tri_radius);
      for (std::size_t j = 0; j < cache.boundary_directions_.size(); ++j) {
        const Vector2& n = cache.boundary_directions_[j];
        if (!(n.dot(nx) > 0)) continue;
        if (domain.signed_distance(mesh.node(x) - probe * n) > domain.boundary_tolerance()) {
          ++cache.skipped_;
          continue;
        }
        BoundaryDirStencil st = triangle_in_ball(ball, n, x);
        st.direction = static_cast<std::int32_t>(j);
        cache.boundary_.push_back(st);
      }
      if (cache.boundary_.size() == cache.boundary_start_.back())
        throw StencilError(StencilErrorKind::NoValidTriangle,
                           "boundary node " + std::to_string(x) + ": no admissible direction");
      cache.boundary_start_.push_back(cache.boundary_.size());
    }
  }
  return cache;
}

void write_stencil_csv(const QuadMesh& mesh, const StencilCache& cache, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# schema: minlag-stencil v1\n";
  out << "kind,node_id,direction,n1,n2,n3,n4,c1,c2,c3,c4\n";
  out.precision(17);
  for (NodeId x = 0; x < static_cast<NodeId>(mesh.size()); ++x) {
    if (mesh.is_interior(x)) {
      const auto st = cache.second(x);
      for (std::size_t j = 0; j < st.size(); ++j) {
        const auto& s = st[j];
        out << "second," << x << ',' << j << ',' << s.nbr[0] << ',' << s.nbr[1] << ',' << s.nbr[2] << ','
            << s.nbr[3] << ',' << s.a[0] << ',' << s.a[1] << ',' << s.a[2] << ',' << s.a[3] << '\n';
      }
      for (int k = 0; k < 2; ++k) {
        const auto& s = cache.axis(x, k);
        out << "centered," << x << ',' << (k == 0 ? "x" : "y") << ',' << s.second.nbr[0] << ',' << s.second.nbr[1]
            << ',' << s.second.nbr[2] << ',' << s.second.nbr[3] << ',' << s.b[0] << ',' << s.b[1] << ',' << s.b[2]
            << ',' << s.b[3] << '\n';
      }
    } else {
      for (const auto& s : cache.boundary(x))
        out << "boundary," << x << ',' << s.direction << ',' << s.nbr[0] << ',' << s.nbr[1] << ",-1,-1," << s.c[0]
            << ',' << s.c[1] << ",0,0\n";
    }
  }
}

}  // namespace mlg
