#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

namespace mlg {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

using Point2 = Vec2<double>;
using Vector2 = Vec2<double>;
using Matrix2 = Mat2<double>;

/// Index into QuadMesh::nodes().
using NodeId = std::int32_t;

/// Discrete unknown u^h: one value per mesh node.
using GridFunction = Eigen::VectorXd;

template <typename Scalar>
inline Scalar cross2(const Vec2<Scalar>& a, const Vec2<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Counter-clockwise quarter turn.
template <typename Scalar>
inline Vec2<Scalar> perp(const Vec2<Scalar>& v) {
  return Vec2<Scalar>(-v.y(), v.x());
}

}  // namespace mlg
