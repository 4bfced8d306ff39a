#pragma once

// Closed-form generalized finite-difference coefficients. Inputs are
// displacements d_j = x_j - x_0 from the stencil center; outputs multiply
// (u(x_j) - u(x_0)).

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "minlag/types.hpp"

namespace mlg {

enum class StencilErrorKind { EmptyQuadrant, DegenerateDenominator, ConvexHullViolation, NoValidTriangle };

const char* to_string(StencilErrorKind kind);

class StencilError : public std::runtime_error {
 public:
  StencilError(StencilErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  StencilErrorKind kind() const { return kind_; }

 private:
  StencilErrorKind kind_;
};

/// Components of d along (nu, nu_perp). |S| below 1e-12 |d| is snapped to
/// zero so lattice-aligned neighbors are recognized exactly.
template <typename Scalar>
inline void polar_components(const Vec2<Scalar>& d, const Vec2<Scalar>& nu, Scalar& C, Scalar& S) {
  C = d.dot(nu);
  S = d.dot(perp(nu));
  const Scalar rho = d.norm();
  if (std::abs(S) <= Scalar(1e-12) * rho) S = 0;
  if (std::abs(C) <= Scalar(1e-12) * rho) C = 0;
}

/// Quadrant of a displacement in the (nu, nu_perp) frame, or -1 for the
/// center itself. Quadrants are half-open in the polar angle:
/// q0 = [0, pi/2), q1 = [pi/2, pi), q2 = [pi, 3pi/2), q3 = [3pi/2, 2pi).
template <typename Scalar>
inline int quadrant_of(Scalar C, Scalar S) {
  if (C == 0 && S == 0) return -1;
  if (S >= 0 && C > 0) return 0;
  if (S > 0 && C <= 0) return 1;
  if (S <= 0 && C < 0) return 2;
  return 3;
}

/// Second directional derivative along nu from one neighbor per quadrant
/// (d[0] in q0, ..., d[3] in q3). All coefficients are nonnegative.
template <typename Scalar>
std::array<Scalar, 4> second_deriv_coefficients(const std::array<Vec2<Scalar>, 4>& d, const Vec2<Scalar>& nu) {
  std::array<Scalar, 4> C{}, S{};
  Scalar scale = 0;
  for (int j = 0; j < 4; ++j) {
    polar_components(d[static_cast<std::size_t>(j)], nu, C[static_cast<std::size_t>(j)], S[static_cast<std::size_t>(j)]);
    if (quadrant_of(C[static_cast<std::size_t>(j)], S[static_cast<std::size_t>(j)]) != j)
      throw StencilError(StencilErrorKind::EmptyQuadrant, "second_deriv_coefficients: neighbor " + std::to_string(j + 1) +
                                                              " is not in its quadrant");
    scale = std::max(scale, d[static_cast<std::size_t>(j)].norm());
  }
  const auto [C1, C2, C3, C4] = C;
  const auto [S1, S2, S3, S4] = S;
  const Scalar p = C3 * S2 - C2 * S3;
  const Scalar q = C1 * S4 - C4 * S1;
  const Scalar den = p * (C1 * C1 * S4 - C4 * C4 * S1) - q * (C3 * C3 * S2 - C2 * C2 * S3);
  const Scalar s5 = scale * scale * scale * scale * scale;
  if (!(std::abs(den) >= Scalar(1e-14) * s5))
    throw StencilError(StencilErrorKind::DegenerateDenominator, "second_deriv_coefficients: degenerate configuration");
  return {2 * S4 * p / den, 2 * S3 * q / den, -2 * S2 * q / den, -2 * S1 * p / den};
}

/// Coefficients (b1, b2) with b1 d1 + b2 d2 = dir: the derivative along dir
/// from two neighbors straddling the dir axis. If one neighbor lies on the
/// axis the other coefficient is exactly zero.
template <typename Scalar>
std::array<Scalar, 2> first_deriv_coefficients(const Vec2<Scalar>& d1, const Vec2<Scalar>& d2, const Vec2<Scalar>& dir) {
  Scalar h1, k1, h2, k2;
  polar_components(d1, dir, h1, k1);
  polar_components(d2, dir, h2, k2);
  if (k1 * k2 > 0)
    throw StencilError(StencilErrorKind::ConvexHullViolation, "first_deriv_coefficients: neighbors on one side of the axis");
  const Scalar den = k1 * h2 - h1 * k2;
  const Scalar scale = std::max(d1.norm(), d2.norm());
  if (!(std::abs(den) >= Scalar(1e-14) * scale * scale))
    throw StencilError(StencilErrorKind::DegenerateDenominator, "first_deriv_coefficients: degenerate configuration");
  return {-k2 / den, k1 / den};
}

/// Outward directional derivative D_n u(x0) = sum_i c_i (u(x_i) - u(x0)) at a
/// boundary node from two neighbors with (x_i - x0).n <= 0 whose cone contains
/// -n. Both coefficients are <= 0.
template <typename Scalar>
std::array<Scalar, 2> boundary_direction_coefficients(const Vec2<Scalar>& d1, const Vec2<Scalar>& d2,
                                                      const Vec2<Scalar>& n) {
  Scalar h1, k1, h2, k2;
  polar_components(d1, n, h1, k1);
  polar_components(d2, n, h2, k2);
  if (h1 > 0 || h2 > 0 || k1 * k2 > 0)
    throw StencilError(StencilErrorKind::ConvexHullViolation,
                       "boundary_direction_coefficients: -n is not inside the neighbor cone");
  const Scalar den = k1 * h2 - h1 * k2;
  const Scalar scale = std::max(d1.norm(), d2.norm());
  if (!(std::abs(den) >= Scalar(1e-14) * scale * scale))
    throw StencilError(StencilErrorKind::DegenerateDenominator, "boundary_direction_coefficients: degenerate configuration");
  const std::array<Scalar, 2> c{-k2 / den, k1 / den};
  if (c[0] > 0 || c[1] > 0)
    throw StencilError(StencilErrorKind::ConvexHullViolation,
                       "boundary_direction_coefficients: -n is not inside the neighbor cone");
  return c;
}

}  // namespace mlg
