#include "minlag/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace mlg {

const char* to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Disk: return "disk";
    case ShapeKind::Ellipse: return "ellipse";
    case ShapeKind::Square: return "square";
    case ShapeKind::Polygon: return "polygon";
    case ShapeKind::Segment: return "segment";
    case ShapeKind::ArcPolygon: return "arc_polygon";
  }
  return "unknown";
}

namespace {

template <typename Scalar>
constexpr Scalar kTwoPi = Scalar(2) * std::numbers::pi_v<Scalar>;

template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  a = std::fmod(a, kTwoPi<Scalar>);
  if (a < 0) a += kTwoPi<Scalar>;
  return a;
}

template <typename Scalar>
Scalar angle_of(const Vec2<Scalar>& v) {
  return std::atan2(v.y(), v.x());
}

template <typename Scalar>
Vec2<Scalar> closest_on_segment(const Vec2<Scalar>& p, const Vec2<Scalar>& a, const Vec2<Scalar>& b) {
  const Vec2<Scalar> d = b - a;
  const Scalar len2 = d.squaredNorm();
  if (len2 == 0) return a;
  const Scalar t = std::clamp((p - a).dot(d) / len2, Scalar(0), Scalar(1));
  return a + t * d;
}

template <typename Scalar>
Scalar piece_length(const BoundaryPiece<Scalar>& piece) {
  return std::visit(
      [](const auto& pc) -> Scalar {
        using T = std::decay_t<decltype(pc)>;
        if constexpr (std::is_same_v<T, LinePiece<Scalar>>) {
          return (pc.b - pc.a).norm();
        } else {
          return pc.radius * pc.sweep;
        }
      },
      piece);
}

// Point at arclength fraction t in [0,1] along a piece.
template <typename Scalar>
Vec2<Scalar> piece_point(const BoundaryPiece<Scalar>& piece, Scalar t) {
  return std::visit(
      [t](const auto& pc) -> Vec2<Scalar> {
        using T = std::decay_t<decltype(pc)>;
        if constexpr (std::is_same_v<T, LinePiece<Scalar>>) {
          return pc.a + t * (pc.b - pc.a);
        } else {
          return pc.point_at(pc.start + t * pc.sweep);
        }
      },
      piece);
}

template <typename Scalar>
Vec2<Scalar> piece_begin(const BoundaryPiece<Scalar>& piece) {
  return piece_point(piece, Scalar(0));
}

template <typename Scalar>
Vec2<Scalar> piece_end(const BoundaryPiece<Scalar>& piece) {
  return piece_point(piece, Scalar(1));
}

template <typename Scalar>
Vec2<Scalar> piece_closest(const BoundaryPiece<Scalar>& piece, const Vec2<Scalar>& p) {
  return std::visit(
      [&p](const auto& pc) -> Vec2<Scalar> {
        using T = std::decay_t<decltype(pc)>;
        if constexpr (std::is_same_v<T, LinePiece<Scalar>>) {
          return closest_on_segment(p, pc.a, pc.b);
        } else {
          const Vec2<Scalar> rel = p - pc.center;
          const Scalar r = rel.norm();
          if (r > 0 && pc.covers_angle(angle_of(rel))) return pc.center + pc.radius * rel / r;
          const Vec2<Scalar> b = pc.begin_point();
          const Vec2<Scalar> e = pc.end_point();
          return (p - b).squaredNorm() <= (p - e).squaredNorm() ? b : e;
        }
      },
      piece);
}

// Outward normal of a piece at one of its points q.
template <typename Scalar>
Vec2<Scalar> piece_normal(const BoundaryPiece<Scalar>& piece, const Vec2<Scalar>& q) {
  return std::visit(
      [&q](const auto& pc) -> Vec2<Scalar> {
        using T = std::decay_t<decltype(pc)>;
        if constexpr (std::is_same_v<T, LinePiece<Scalar>>) {
          const Vec2<Scalar> d = (pc.b - pc.a).normalized();
          return Vec2<Scalar>(d.y(), -d.x());
        } else {
          return (q - pc.center).normalized();
        }
      },
      piece);
}

template <typename Scalar>
Scalar piece_support(const BoundaryPiece<Scalar>& piece, const Vec2<Scalar>& n) {
  return std::visit(
      [&n](const auto& pc) -> Scalar {
        using T = std::decay_t<decltype(pc)>;
        if constexpr (std::is_same_v<T, LinePiece<Scalar>>) {
          return std::max(n.dot(pc.a), n.dot(pc.b));
        } else {
          if (pc.covers_angle(angle_of(n))) return n.dot(pc.center) + pc.radius;
          return std::max(n.dot(pc.begin_point()), n.dot(pc.end_point()));
        }
      },
      piece);
}

template <typename Scalar>
Scalar piece_max_norm(const BoundaryPiece<Scalar>& piece) {
  return std::visit(
      [](const auto& pc) -> Scalar {
        using T = std::decay_t<decltype(pc)>;
        if constexpr (std::is_same_v<T, LinePiece<Scalar>>) {
          return std::max(pc.a.norm(), pc.b.norm());
        } else {
          const Scalar c = pc.center.norm();
          if (c == 0 || pc.covers_angle(angle_of(pc.center))) return c + pc.radius;
          return std::max(pc.begin_point().norm(), pc.end_point().norm());
        }
      },
      piece);
}

// Closest point on the axis-aligned ellipse (y0/e0)^2 + (y1/e1)^2 = 1 for a
// query in the closed first quadrant, e0 >= e1 > 0. Bisection on the
// Lagrange multiplier, robust for points inside and outside.
template <typename Scalar>
Vec2<Scalar> ellipse_closest_q1(Scalar e0, Scalar e1, Scalar y0, Scalar y1) {
  if (y1 > 0) {
    if (y0 > 0) {
      const Scalar z0 = y0 / e0;
      const Scalar z1 = y1 / e1;
      Scalar g = z0 * z0 + z1 * z1 - 1;
      if (g == 0) return {y0, y1};
      const Scalar r0 = (e0 / e1) * (e0 / e1);
      const Scalar n0 = r0 * z0;
      Scalar s0 = z1 - 1;
      Scalar s1 = g < 0 ? Scalar(0) : std::hypot(n0, z1) - 1;
      Scalar s = 0;
      for (int i = 0; i < 1000; ++i) {
        s = (s0 + s1) / 2;
        if (s == s0 || s == s1) break;
        const Scalar ratio0 = n0 / (s + r0);
        const Scalar ratio1 = z1 / (s + 1);
        g = ratio0 * ratio0 + ratio1 * ratio1 - 1;
        if (g > 0) {
          s0 = s;
        } else if (g < 0) {
          s1 = s;
        } else {
          break;
        }
      }
      return {r0 * y0 / (s + r0), y1 / (s + 1)};
    }
    return {Scalar(0), e1};
  }
  const Scalar numer0 = e0 * y0;
  const Scalar denom0 = e0 * e0 - e1 * e1;
  if (numer0 < denom0) {
    const Scalar xde0 = numer0 / denom0;
    return {e0 * xde0, e1 * std::sqrt(std::max(Scalar(0), 1 - xde0 * xde0))};
  }
  return {e0, Scalar(0)};
}

}  // namespace

template <typename Scalar>
Vec2<Scalar> ArcPiece<Scalar>::point_at(Scalar angle) const {
  return center + radius * Vec2<Scalar>(std::cos(angle), std::sin(angle));
}

template <typename Scalar>
bool ArcPiece<Scalar>::covers_angle(Scalar angle) const {
  if (sweep >= kTwoPi<Scalar>) return true;
  return wrap_angle(angle - start) <= sweep;
}

template <typename Scalar>
ConvexBody<Scalar>::ConvexBody(ShapeKind kind, std::variant<Disk, Ellipse, Piecewise, Segment> shape)
    : kind_(kind), shape_(std::move(shape)) {
  std::visit(
      [this](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          diameter_ = 2 * s.radius;
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          diameter_ = 2 * s.semi_axes(0);
        } else if constexpr (std::is_same_v<T, Segment>) {
          diameter_ = (s.b - s.a).norm();
        } else {
          // Corners plus a dense sample of arcs bound the diameter from below
          // to well within the tolerances it scales.
          std::vector<Vec> pts;
          for (const auto& piece : s.pieces) {
            for (int k = 0; k <= 64; ++k) pts.push_back(piece_point(piece, Scalar(k) / 64));
          }
          Scalar d = 0;
          for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, (pts[i] - pts[j]).norm());
          diameter_ = d;
        }
      },
      shape_);
}

template <typename Scalar>
ConvexBody<Scalar> ConvexBody<Scalar>::disk(const Vec& center, Scalar radius) {
  if (!(radius > 0) || !center.allFinite()) throw GeometryError("disk: radius must be positive");
  return ConvexBody(ShapeKind::Disk, Disk{center, radius});
}

template <typename Scalar>
ConvexBody<Scalar> ConvexBody<Scalar>::ellipse(const Mat& matrix, const Vec& center) {
  if (!matrix.allFinite() || std::abs(matrix(0, 1) - matrix(1, 0)) > Scalar(1e-12) * matrix.norm())
    throw GeometryError("ellipse: matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> eig(matrix);
  const Vec values = eig.eigenvalues();  // ascending
  if (!(values(0) > 0)) throw GeometryError("ellipse: matrix must be positive definite");
  Ellipse e;
  e.center = center;
  e.matrix = matrix;
  e.axes.col(0) = eig.eigenvectors().col(1);
  e.axes.col(1) = eig.eigenvectors().col(0);
  e.semi_axes = Vec(values(1), values(0));
  return ConvexBody(ShapeKind::Ellipse, e);
}

template <typename Scalar>
ConvexBody<Scalar> ConvexBody<Scalar>::square(const Vec& center, Scalar half_width) {
  if (!(half_width > 0)) throw GeometryError("square: half-width must be positive");
  const Scalar w = half_width;
  auto body = polygon({center + Vec(-w, -w), center + Vec(w, -w), center + Vec(w, w), center + Vec(-w, w)});
  body.kind_ = ShapeKind::Square;
  return body;
}

template <typename Scalar>
ConvexBody<Scalar> ConvexBody<Scalar>::polygon(std::vector<Vec> v) {
  const std::size_t n = v.size();
  if (n < 3) throw GeometryError("polygon: need at least 3 vertices");
  for (std::size_t i = 0; i < n; ++i) {
    const Vec e0 = v[(i + 1) % n] - v[i];
    const Vec e1 = v[(i + 2) % n] - v[(i + 1) % n];
    if (!(cross2(e0, e1) > 0)) throw GeometryError("polygon: vertices must be strictly convex and counter-clockwise");
  }
  Piecewise pw;
  for (std::size_t i = 0; i < n; ++i) pw.pieces.push_back(LinePiece<Scalar>{v[i], v[(i + 1) % n]});
  return ConvexBody(ShapeKind::Polygon, std::move(pw));
}

template <typename Scalar>
ConvexBody<Scalar> ConvexBody<Scalar>::segment(const Vec& a, const Vec& b) {
  if (!((b - a).norm() > 0)) throw GeometryError("segment: endpoints must differ");
  return ConvexBody(ShapeKind::Segment, Segment{a, b});
}

template <typename Scalar>
ConvexBody<Scalar> ConvexBody<Scalar>::arc_polygon(std::vector<BoundaryPiece<Scalar>> pieces) {
  if (pieces.empty()) throw GeometryError("arc_polygon: no pieces");
  Scalar scale = 0;
  for (const auto& p : pieces) scale = std::max(scale, piece_length(p));
  Scalar area2 = 0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const Vec end = piece_end(pieces[i]);
    const Vec next = piece_begin(pieces[(i + 1) % pieces.size()]);
    if ((end - next).norm() > Scalar(1e-9) * scale) throw GeometryError("arc_polygon: chain is not closed");
    for (int k = 0; k < 32; ++k)
      area2 += cross2(piece_point(pieces[i], Scalar(k) / 32), piece_point(pieces[i], Scalar(k + 1) / 32));
  }
  if (!(area2 > 0)) throw GeometryError("arc_polygon: chain must be counter-clockwise");
  return ConvexBody(ShapeKind::ArcPolygon, Piecewise{std::move(pieces)});
}

template <typename Scalar>
auto ConvexBody<Scalar>::closest_boundary_point(const Vec& p) const -> Vec {
  return std::visit(
      [&p](const auto& s) -> Vec {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          const Vec rel = p - s.center;
          const Scalar r = rel.norm();
          if (r == 0) return s.center + Vec(s.radius, 0);
          return s.center + s.radius * rel / r;
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          const Vec y = s.axes.transpose() * (p - s.center);
          const Vec q = ellipse_closest_q1(s.semi_axes(0), s.semi_axes(1), std::abs(y(0)), std::abs(y(1)));
          const Vec signed_q(std::copysign(q(0), y(0)), std::copysign(q(1), y(1)));
          return s.center + s.axes * signed_q;
        } else if constexpr (std::is_same_v<T, Segment>) {
          return closest_on_segment(p, s.a, s.b);
        } else {
          Vec best = piece_closest(s.pieces.front(), p);
          Scalar best_d = (best - p).squaredNorm();
          for (std::size_t i = 1; i < s.pieces.size(); ++i) {
            const Vec q = piece_closest(s.pieces[i], p);
            const Scalar d = (q - p).squaredNorm();
            if (d < best_d) {
              best_d = d;
              best = q;
            }
          }
          return best;
        }
      },
      shape_);
}

template <typename Scalar>
bool ConvexBody<Scalar>::contains(const Vec& p) const {
  return std::visit(
      [this, &p](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          return (p - s.center).norm() <= s.radius;
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          const Vec y = s.axes.transpose() * (p - s.center);
          const Scalar a = y(0) / s.semi_axes(0);
          const Scalar b = y(1) / s.semi_axes(1);
          return a * a + b * b <= 1;
        } else if constexpr (std::is_same_v<T, Segment>) {
          return (closest_on_segment(p, s.a, s.b) - p).norm() <= boundary_tolerance();
        } else {
          // Intersection of the line half-planes, and for each arc the union
          // of its disk with the inner side of its chord.
          for (const auto& piece : s.pieces) {
            if (const auto* line = std::get_if<LinePiece<Scalar>>(&piece)) {
              if (cross2<Scalar>(line->b - line->a, p - line->a) < 0) return false;
            } else {
              const auto& arc = std::get<ArcPiece<Scalar>>(piece);
              if (arc.sweep >= kTwoPi<Scalar>) {
                if ((p - arc.center).norm() > arc.radius) return false;
                continue;
              }
              const Vec b = arc.begin_point();
              const Vec e = arc.end_point();
              if ((p - arc.center).norm() > arc.radius && cross2<Scalar>(e - b, p - b) < 0) return false;
            }
          }
          return true;
        }
      },
      shape_);
}

template <typename Scalar>
Scalar ConvexBody<Scalar>::signed_distance(const Vec& p) const {
  if (const auto* d = std::get_if<Disk>(&shape_)) return (p - d->center).norm() - d->radius;
  const Scalar dist = (closest_boundary_point(p) - p).norm();
  if (kind_ == ShapeKind::Segment) return dist;
  return contains(p) ? -dist : dist;
}

template <typename Scalar>
auto ConvexBody<Scalar>::signed_distance_gradient(const Vec& p) const -> Vec {
  if (const auto* d = std::get_if<Disk>(&shape_)) {
    const Vec rel = p - d->center;
    const Scalar r = rel.norm();
    return r > 0 ? Vec(rel / r) : Vec(1, 0);
  }
  if (const auto* e = std::get_if<Ellipse>(&shape_)) {
    const Vec q = closest_boundary_point(p);
    const Vec y = e->axes.transpose() * (q - e->center);
    const Vec g(y(0) / (e->semi_axes(0) * e->semi_axes(0)), y(1) / (e->semi_axes(1) * e->semi_axes(1)));
    return (e->axes * g).normalized();
  }
  const Vec q = closest_boundary_point(p);
  const Vec rel = p - q;
  const Scalar dist = rel.norm();
  if (dist > boundary_tolerance()) {
    if (kind_ == ShapeKind::Segment || !contains(p)) return rel / dist;
    return -rel / dist;
  }
  return outward_normal(q);
}

template <typename Scalar>
Scalar ConvexBody<Scalar>::support(const Vec& direction) const {
  const Scalar len = direction.norm();
  if (!(len > 0)) throw GeometryError("support: zero direction");
  const Vec n = direction / len;
  return std::visit(
      [&n](const auto& s) -> Scalar {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          return n.dot(s.center) + s.radius;
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          return n.dot(s.center) + (s.matrix * n).norm();
        } else if constexpr (std::is_same_v<T, Segment>) {
          return std::max(n.dot(s.a), n.dot(s.b));
        } else {
          Scalar best = -std::numeric_limits<Scalar>::infinity();
          for (const auto& piece : s.pieces) best = std::max(best, piece_support(piece, n));
          return best;
        }
      },
      shape_);
}

template <typename Scalar>
auto ConvexBody<Scalar>::outward_normal(const Vec& p) const -> Vec {
  const Scalar tol = boundary_tolerance();
  if (std::abs(signed_distance(p)) > tol) throw GeometryError("outward_normal: point is not on the boundary");
  return std::visit(
      [&p, tol](const auto& s) -> Vec {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          return (p - s.center).normalized();
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          const Vec y = s.axes.transpose() * (p - s.center);
          const Vec g(y(0) / (s.semi_axes(0) * s.semi_axes(0)), y(1) / (s.semi_axes(1) * s.semi_axes(1)));
          return (s.axes * g).normalized();
        } else if constexpr (std::is_same_v<T, Segment>) {
          const Vec d = (s.b - s.a).normalized();
          if ((p - s.a).norm() <= tol) return -d;
          if ((p - s.b).norm() <= tol) return d;
          return perp<Scalar>(d);
        } else {
          Vec sum = Vec::Zero();
          for (const auto& piece : s.pieces) {
            const Vec q = piece_closest(piece, p);
            if ((q - p).norm() <= tol) sum += piece_normal(piece, q);
          }
          return sum.normalized();
        }
      },
      shape_);
}

template <typename Scalar>
Scalar ConvexBody<Scalar>::perimeter() const {
  return std::visit(
      [](const auto& s) -> Scalar {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          return kTwoPi<Scalar> * s.radius;
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          // Composite Simpson on the smooth periodic integrand is spectrally
          // accurate; 4096 panels is far below round-off for our aspect ratios.
          const int n = 4096;
          Scalar total = 0;
          for (int k = 0; k < n; ++k) {
            const Scalar t = kTwoPi<Scalar> * k / n;
            total += (s.matrix * Vec(-std::sin(t), std::cos(t))).norm();
          }
          return total * kTwoPi<Scalar> / n;
        } else if constexpr (std::is_same_v<T, Segment>) {
          return 2 * (s.b - s.a).norm();
        } else {
          Scalar total = 0;
          for (const auto& piece : s.pieces) total += piece_length(piece);
          return total;
        }
      },
      shape_);
}

template <typename Scalar>
Scalar ConvexBody<Scalar>::diameter() const {
  return diameter_;
}

template <typename Scalar>
Scalar ConvexBody<Scalar>::max_norm() const {
  return std::visit(
      [](const auto& s) -> Scalar {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          return s.center.norm() + s.radius;
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          auto radius_at = [&s](Scalar t) { return (s.center + s.matrix * Vec(std::cos(t), std::sin(t))).norm(); };
          const int n = 720;
          int best = 0;
          for (int k = 1; k < n; ++k)
            if (radius_at(kTwoPi<Scalar> * k / n) > radius_at(kTwoPi<Scalar> * best / n)) best = k;
          // Golden-section refinement around the best sample.
          Scalar lo = kTwoPi<Scalar> * (best - 1) / n;
          Scalar hi = kTwoPi<Scalar> * (best + 1) / n;
          const Scalar ratio = (std::sqrt(Scalar(5)) - 1) / 2;
          for (int it = 0; it < 200; ++it) {
            const Scalar m1 = hi - ratio * (hi - lo);
            const Scalar m2 = lo + ratio * (hi - lo);
            if (radius_at(m1) < radius_at(m2)) {
              lo = m1;
            } else {
              hi = m2;
            }
          }
          return radius_at((lo + hi) / 2);
        } else if constexpr (std::is_same_v<T, Segment>) {
          return std::max(s.a.norm(), s.b.norm());
        } else {
          Scalar best = 0;
          for (const auto& piece : s.pieces) best = std::max(best, piece_max_norm(piece));
          return best;
        }
      },
      shape_);
}

template <typename Scalar>
auto ConvexBody<Scalar>::bounding_box() const -> std::pair<Vec, Vec> {
  return std::visit(
      [](const auto& s) -> std::pair<Vec, Vec> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          const Vec r = Vec::Constant(s.radius);
          return {s.center - r, s.center + r};
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          const Vec half(s.matrix.row(0).norm(), s.matrix.row(1).norm());
          return {s.center - half, s.center + half};
        } else if constexpr (std::is_same_v<T, Segment>) {
          return {s.a.cwiseMin(s.b), s.a.cwiseMax(s.b)};
        } else {
          Vec lo = Vec::Constant(std::numeric_limits<Scalar>::infinity());
          Vec hi = -lo;
          for (const auto& piece : s.pieces) {
            std::vector<Vec> pts{piece_begin(piece), piece_end(piece)};
            if (const auto* arc = std::get_if<ArcPiece<Scalar>>(&piece)) {
              for (int q = 0; q < 4; ++q) {
                const Scalar a = q * std::numbers::pi_v<Scalar> / 2;
                if (arc->covers_angle(a)) pts.push_back(arc->point_at(a));
              }
            }
            for (const auto& pt : pts) {
              lo = lo.cwiseMin(pt);
              hi = hi.cwiseMax(pt);
            }
          }
          return {lo, hi};
        }
      },
      shape_);
}

template <typename Scalar>
auto ConvexBody<Scalar>::centroid() const -> Vec {
  if (const auto* d = std::get_if<Disk>(&shape_)) return d->center;
  if (const auto* e = std::get_if<Ellipse>(&shape_)) return e->center;
  if (const auto* s = std::get_if<Segment>(&shape_)) return (s->a + s->b) / 2;
  const auto pts = boundary_points(perimeter() / 4096);
  Scalar area2 = 0;
  Vec acc = Vec::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec& a = pts[i];
    const Vec& b = pts[(i + 1) % pts.size()];
    const Scalar c = cross2(a, b);
    area2 += c;
    acc += c * (a + b);
  }
  return acc / (3 * area2);
}

template <typename Scalar>
auto ConvexBody<Scalar>::boundary_sample(std::size_t count) const -> std::vector<Vec> {
  if (count < 3) throw GeometryError("boundary_sample: count must be at least 3");
  std::vector<Vec> out;
  out.reserve(count);
  std::visit(
      [&out, count, this](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          for (std::size_t k = 0; k < count; ++k) {
            const Scalar t = kTwoPi<Scalar> * Scalar(k) / Scalar(count);
            out.push_back(s.center + s.radius * Vec(std::cos(t), std::sin(t)));
          }
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          // Invert a cumulative arclength table by linear interpolation.
          const std::size_t m = std::max<std::size_t>(4096, 8 * count);
          std::vector<Scalar> cum(m + 1, 0);
          auto at = [&s](Scalar t) -> Vec { return s.center + s.matrix * Vec(std::cos(t), std::sin(t)); };
          for (std::size_t j = 1; j <= m; ++j)
            cum[j] = cum[j - 1] + (at(kTwoPi<Scalar> * j / m) - at(kTwoPi<Scalar> * (j - 1) / m)).norm();
          const Scalar total = cum[m];
          std::size_t j = 0;
          for (std::size_t k = 0; k < count; ++k) {
            const Scalar target = total * Scalar(k) / Scalar(count);
            while (j + 1 < m && cum[j + 1] < target) ++j;
            const Scalar frac = (target - cum[j]) / (cum[j + 1] - cum[j]);
            out.push_back(at(kTwoPi<Scalar> * (Scalar(j) + frac) / Scalar(m)));
          }
        } else if constexpr (std::is_same_v<T, Segment>) {
          for (std::size_t k = 0; k < count; ++k) {
            Scalar t = 2 * Scalar(k) / Scalar(count);
            if (t > 1) t = 2 - t;
            out.push_back(s.a + t * (s.b - s.a));
          }
        } else {
          const Scalar total = perimeter();
          std::size_t piece = 0;
          Scalar start = 0;
          for (std::size_t k = 0; k < count; ++k) {
            const Scalar target = total * Scalar(k) / Scalar(count);
            while (piece + 1 < s.pieces.size() && start + piece_length(s.pieces[piece]) <= target) {
              start += piece_length(s.pieces[piece]);
              ++piece;
            }
            const Scalar len = piece_length(s.pieces[piece]);
            out.push_back(piece_point(s.pieces[piece], std::clamp((target - start) / len, Scalar(0), Scalar(1))));
          }
        }
      },
      shape_);
  return out;
}

template <typename Scalar>
auto ConvexBody<Scalar>::boundary_points(Scalar spacing) const -> std::vector<Vec> {
  if (!(spacing > 0)) throw GeometryError("boundary_points: spacing must be positive");
  if (const auto* pw = std::get_if<Piecewise>(&shape_)) {
    std::vector<Vec> out;
    for (const auto& piece : pw->pieces) {
      const auto n = static_cast<std::size_t>(std::max(Scalar(1), std::ceil(piece_length(piece) / spacing)));
      for (std::size_t k = 0; k < n; ++k) out.push_back(piece_point(piece, Scalar(k) / Scalar(n)));
    }
    return out;
  }
  const auto count = static_cast<std::size_t>(std::max(Scalar(3), std::ceil(perimeter() / spacing)));
  return boundary_sample(count);
}

template class ConvexBody<double>;
template class ConvexBody<long double>;
template struct ArcPiece<double>;
template struct ArcPiece<long double>;

namespace shapes {

ConvexBodyd bowl() {
  const Point2 center(0, -0.6);
  const double radius = 1.4;
  const double half_chord = std::sqrt(radius * radius - 1.2 * 1.2);
  const double right = std::atan2(1.2, half_chord);
  const double left = std::numbers::pi - right;
  std::vector<BoundaryPiece<double>> pieces{
      ArcPiece<double>{center, radius, left, right + 2 * std::numbers::pi - left},
      LinePiece<double>{Point2(half_chord, 0.6), Point2(-half_chord, 0.6)}};
  return ConvexBodyd::arc_polygon(std::move(pieces));
}

ConvexBodyd ice_cream_cone() {
  const Point2 center(0, 0.4);
  const double radius = 0.6;
  const Point2 apex(0, -0.8);
  const ArcPiece<double> cap{center, radius, -std::numbers::pi / 6, 4 * std::numbers::pi / 3};
  std::vector<BoundaryPiece<double>> pieces{cap, LinePiece<double>{cap.end_point(), apex},
                                            LinePiece<double>{apex, cap.begin_point()}};
  return ConvexBodyd::arc_polygon(std::move(pieces));
}

ConvexBodyd regular_polygon(int sides, double circumradius, double first_vertex_angle) {
  if (sides < 3) throw GeometryError("regular_polygon: need at least 3 sides");
  std::vector<Point2> v;
  for (int k = 0; k < sides; ++k) {
    const double t = first_vertex_angle + 2 * std::numbers::pi * k / sides;
    v.emplace_back(circumradius * std::cos(t), circumradius * std::sin(t));
  }
  return ConvexBodyd::polygon(std::move(v));
}

ConvexBodyd pentagon() { return regular_polygon(5, 1.0, std::numbers::pi / 2); }

}  // namespace shapes

}  // namespace mlg
