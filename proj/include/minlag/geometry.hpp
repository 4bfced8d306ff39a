#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "minlag/types.hpp"

namespace mlg {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ShapeKind { Disk, Ellipse, Square, Polygon, Segment, ArcPolygon };

const char* to_string(ShapeKind kind);

/// Straight boundary piece traversed from a to b (interior on the left).
template <typename Scalar>
struct LinePiece {
  Vec2<Scalar> a;
  Vec2<Scalar> b;
};

/// Circular boundary arc traversed counter-clockwise from angle `start`
/// through `sweep` radians.
template <typename Scalar>
struct ArcPiece {
  Vec2<Scalar> center;
  Scalar radius;
  Scalar start;
  Scalar sweep;

  Vec2<Scalar> point_at(Scalar angle) const;
  Vec2<Scalar> begin_point() const { return point_at(start); }
  Vec2<Scalar> end_point() const { return point_at(start + sweep); }
  bool covers_angle(Scalar angle) const;
};

template <typename Scalar>
using BoundaryPiece = std::variant<LinePiece<Scalar>, ArcPiece<Scalar>>;

/// A closed convex planar set (or a degenerate segment) with exact geometric
/// queries. Immutable after construction.
///
/// Signed distance is negative strictly inside. The support function is
/// sup_{y in body} n.y; non-unit directions are normalized first, so the
/// result is the value for n/|n|.
template <typename Scalar>
class ConvexBody {
 public:
  using Vec = Vec2<Scalar>;
  using Mat = Mat2<Scalar>;

  static ConvexBody disk(const Vec& center, Scalar radius);
  /// Image of the closed unit disk under a symmetric positive definite
  /// matrix, shifted by center.
  static ConvexBody ellipse(const Mat& matrix, const Vec& center = Vec::Zero());
  static ConvexBody square(const Vec& center, Scalar half_width);
  /// Vertices in counter-clockwise order; must form a strictly convex polygon.
  static ConvexBody polygon(std::vector<Vec> ccw_vertices);
  static ConvexBody segment(const Vec& a, const Vec& b);
  /// Closed counter-clockwise chain of line and arc pieces.
  static ConvexBody arc_polygon(std::vector<BoundaryPiece<Scalar>> pieces);

  ShapeKind kind() const { return kind_; }

  Scalar signed_distance(const Vec& p) const;
  /// Gradient of the signed distance: the outward unit normal at the
  /// closest boundary point.
  Vec signed_distance_gradient(const Vec& p) const;
  Vec closest_boundary_point(const Vec& p) const;
  Scalar support(const Vec& n) const;
  /// Throws GeometryError if p is farther than boundary_tolerance() from the
  /// boundary. Corners return the bisector of the adjacent normals.
  Vec outward_normal(const Vec& p) const;
  bool contains(const Vec& p) const;

  /// `count` points on the boundary, approximately uniform in arclength.
  std::vector<Vec> boundary_sample(std::size_t count) const;
  /// Boundary points at arclength spacing <= spacing. Corners are always
  /// included for piecewise boundaries.
  std::vector<Vec> boundary_points(Scalar spacing) const;

  Scalar perimeter() const;
  Scalar diameter() const;
  /// max over the body of |y|, equivalently max over unit n of support(n).
  Scalar max_norm() const;
  std::pair<Vec, Vec> bounding_box() const;
  Vec centroid() const;
  Scalar boundary_tolerance() const { return Scalar(1e-9) * diameter(); }

 private:
  struct Disk {
    Vec center;
    Scalar radius;
  };
  struct Ellipse {
    Vec center;
    Mat matrix;
    Mat axes;       // columns: principal directions, major first
    Vec semi_axes;  // major, minor
  };
  struct Piecewise {
    std::vector<BoundaryPiece<Scalar>> pieces;
  };
  struct Segment {
    Vec a;
    Vec b;
  };

  ConvexBody(ShapeKind kind, std::variant<Disk, Ellipse, Piecewise, Segment> shape);

  ShapeKind kind_;
  std::variant<Disk, Ellipse, Piecewise, Segment> shape_;
  Scalar diameter_ = 0;
};

using ConvexBodyd = ConvexBody<double>;

template <typename Scalar>
Scalar signed_distance(const ConvexBody<Scalar>& body, const Vec2<Scalar>& p) {
  return body.signed_distance(p);
}

template <typename Scalar>
Scalar support_function(const ConvexBody<Scalar>& body, const Vec2<Scalar>& n) {
  return body.support(n);
}

template <typename Scalar>
Vec2<Scalar> outward_normal(const ConvexBody<Scalar>& body, const Vec2<Scalar>& p) {
  return body.outward_normal(p);
}

template <typename Scalar>
bool contains(const ConvexBody<Scalar>& body, const Vec2<Scalar>& p) {
  return body.contains(p);
}

template <typename Scalar>
std::vector<Vec2<Scalar>> boundary_sample(const ConvexBody<Scalar>& body, std::size_t count) {
  return body.boundary_sample(count);
}

/// A priori gradient bound R = safety_factor * max_{|n|=1} H*(n).
template <typename Scalar>
Scalar gradient_bound_R(const ConvexBody<Scalar>& body, Scalar safety_factor = Scalar(1.1)) {
  return safety_factor * body.max_norm();
}

// Gallery targets, all centered near the origin.
namespace shapes {

/// Disk of radius 1.4 centered at (0,-0.6), cut by the line y = 0.6.
ConvexBodyd bowl();
/// Hull of a disk (radius 0.6, center (0,0.4)) and the apex (0,-0.8):
/// a cone with 60 degree opening capped by a 240 degree arc.
ConvexBodyd ice_cream_cone();
ConvexBodyd regular_polygon(int sides, double circumradius, double first_vertex_angle);
ConvexBodyd pentagon();

}  // namespace shapes

extern template class ConvexBody<double>;
extern template class ConvexBody<long double>;

}  // namespace mlg
