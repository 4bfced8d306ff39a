#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "minlag/stencils.hpp"

using namespace mlg;
using doctest::Approx;

namespace {

// Random displacement in quadrant q of the (nu, nu_perp) frame.
Vector2 in_quadrant(std::mt19937_64& rng, const Vector2& nu, int q) {
  std::uniform_real_distribution<double> rho(0.2, 1.0), phi(0.02, std::numbers::pi / 2 - 0.02);
  const double a = phi(rng) + q * std::numbers::pi / 2;
  const double r = rho(rng);
  return r * (std::cos(a) * nu + std::sin(a) * perp(nu));
}

}  // namespace

TEST_CASE("classical three-point stencil on aligned neighbors") {
  const Vector2 nu(1, 0);
  const double h = 0.1;
  // axis points are shared: (h,0) is q0, (-h,0) is q2; the q1/q3 partners sit on the perpendicular axis
  const std::array<Vector2, 4> d{Vector2(h, 0), Vector2(0, h), Vector2(-h, 0), Vector2(0, -h)};
  const auto a = second_deriv_coefficients(d, nu);
  CHECK(a[0] == Approx(1 / (h * h)));
  CHECK(a[2] == Approx(1 / (h * h)));
  CHECK(a[1] == Approx(0.0).epsilon(1e-12));
  CHECK(a[3] == Approx(0.0).epsilon(1e-12));
}

TEST_CASE("second-derivative moments on random stencils") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi);
  int tested = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double t = ang(rng);
    const Vector2 nu(std::cos(t), std::sin(t));
    std::array<Vector2, 4> d;
    for (int q = 0; q < 4; ++q) d[static_cast<std::size_t>(q)] = in_quadrant(rng, nu, q);
    std::array<double, 4> a;
    try {
      a = second_deriv_coefficients(d, nu);
    } catch (const StencilError&) {
      continue;
    }
    ++tested;
    double m0 = 0, mc = 0, ms = 0, mcc = 0, scale = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      const double C = d[j].dot(nu), S = d[j].dot(perp(nu));
      CHECK(a[j] >= 0);
      m0 += a[j];
      mc += a[j] * C;
      ms += a[j] * S;
      mcc += a[j] * C * C;
      scale += a[j] * d[j].squaredNorm();
    }
    CHECK(std::abs(mc) <= 1e-10 * scale);
    CHECK(std::abs(ms) <= 1e-10 * scale);
    CHECK(std::abs(mcc - 2) <= 1e-10 * scale);
    CHECK(m0 > 0);
  }
  CHECK(tested > 900);
}

TEST_CASE("second-derivative stencil is exact on span{1, x.nu, x.nu_perp, (x.nu)^2}") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const double t = 0.1 * trial;
    const Vector2 nu(std::cos(t), std::sin(t));
    std::array<Vector2, 4> d;
    for (int q = 0; q < 4; ++q) d[static_cast<std::size_t>(q)] = in_quadrant(rng, nu, q);
    const auto a = second_deriv_coefficients(d, nu);
    const double c0 = 0.3, c1 = -1.2, c2 = 0.7, k = 2.5;
    auto f = [&](const Vector2& x) { return c0 + c1 * x.dot(nu) + c2 * x.dot(perp(nu)) + 0.5 * k * std::pow(x.dot(nu), 2); };
    double val = 0, scale = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      val += a[j] * (f(d[j]) - f(Vector2::Zero()));
      scale += a[j] * std::abs(f(d[j]) - f(Vector2::Zero()));
    }
    CHECK(std::abs(val - k) <= 1e-10 * std::max(scale, 1.0));
  }
}

TEST_CASE("mixed moment vanishes on symmetric stencils") {
  const Vector2 nu = Vector2(1, 2).normalized();
  const Vector2 p = perp(nu);
  const std::array<Vector2, 4> d{0.5 * nu + 0.1 * p, -0.5 * nu + 0.1 * p, -0.5 * nu - 0.1 * p, 0.5 * nu - 0.1 * p};
  const auto a = second_deriv_coefficients(d, nu);
  double mcs = 0;
  for (std::size_t j = 0; j < 4; ++j) mcs += a[j] * d[j].dot(nu) * d[j].dot(p);
  CHECK(std::abs(mcs) < 1e-12);
}

TEST_CASE("stencil coefficient errors") {
  const Vector2 nu(1, 0);
  const std::array<Vector2, 4> wrong{Vector2(1, 0.1), Vector2(1, 0.2), Vector2(-1, -0.1), Vector2(1, -0.1)};
  CHECK_THROWS_AS(second_deriv_coefficients(wrong, nu), StencilError);
  try {
    first_deriv_coefficients(Vector2(1, 1), Vector2(2, 1), nu);
    FAIL("expected ConvexHullViolation");
  } catch (const StencilError& e) {
    CHECK(e.kind() == StencilErrorKind::ConvexHullViolation);
  }
}

TEST_CASE("first-derivative and boundary stencils are exact on affine functions") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1, 1);
  int tested = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double t = 7 * U(rng);
    const Vector2 dir(std::cos(t), std::sin(t));
    const Vector2 g(U(rng), U(rng));
    // first derivative: neighbors on either side of the dir axis, ahead of x0
    const Vector2 d1 = std::abs(U(rng)) * dir + (0.05 + std::abs(U(rng))) * perp(dir);
    const Vector2 d2 = std::abs(U(rng)) * dir - (0.05 + std::abs(U(rng))) * perp(dir);
    try {
      const auto b = first_deriv_coefficients(d1, d2, dir);
      const double val = b[0] * g.dot(d1) + b[1] * g.dot(d2);
      CHECK(std::abs(val - g.dot(dir)) <= 1e-12 * std::max({1.0, std::abs(b[0] * g.dot(d1)), std::abs(b[1] * g.dot(d2))}));
      ++tested;
    } catch (const StencilError&) {
    }
    // boundary: cone around -n
    const Vector2 n = dir;
    const Vector2 e1 = -(0.05 + std::abs(U(rng))) * n + (0.05 + std::abs(U(rng))) * perp(n);
    const Vector2 e2 = -(0.05 + std::abs(U(rng))) * n - (0.05 + std::abs(U(rng))) * perp(n);
    const auto c = boundary_direction_coefficients(e1, e2, n);
    CHECK(c[0] <= 0);
    CHECK(c[1] <= 0);
    const double val = c[0] * g.dot(e1) + c[1] * g.dot(e2);
    CHECK(std::abs(val - g.dot(n)) <= 1e-12 * std::max({1.0, std::abs(c[0] * g.dot(e1)), std::abs(c[1] * g.dot(e2))}));
  }
  CHECK(tested > 900);
}

TEST_CASE("direction sets contain both axes") {
  const auto p = MeshParams::from_h(0.065625);
  const auto half = DirectionSet::half_turn(p.dtheta);
  const auto full = DirectionSet::full_turn(p.dtheta);
  CHECK(full.size() == 2 * half.size());
  bool ex = false, ey = false;
  for (const auto& v : half.directions) {
    CHECK(v.norm() == Approx(1.0));
    ex = ex || v == Vector2(-1, 0);
    ey = ey || v == Vector2(0, 1);
  }
  CHECK(ex);
  CHECK(ey);
}

TEST_CASE("stencil cache: selection, signs, exactness on a mesh") {
  const auto disk = ConvexBodyd::disk(Point2::Zero(), 1.0);
  const auto mesh = build_mesh(disk, MeshParams::from_h(0.06875));
  const auto cache = StencilCache::build(mesh, disk);
  const double r = mesh.params().r;
  const auto& dirs = cache.directions();
  Matrix2 A;
  A << 1.3, 0.4, 0.4, 0.6;
  const Vector2 g(0.2, -0.7);
  auto f = [&](const Point2& x) { return 0.5 * x.dot(A * x) + g.dot(x); };
  for (NodeId x = 0; x < static_cast<NodeId>(mesh.size()); ++x) {
    if (!mesh.is_interior(x)) {
      const Vector2 nx = cache.boundary_normal(x);
      for (const auto& st : cache.boundary(x)) {
        const Vector2& n = cache.boundary_directions()[static_cast<std::size_t>(st.direction)];
        CHECK(n.dot(nx) > 0);
        double val = 0, scale = 1;
        for (int k = 0; k < 2; ++k) {
          if (st.nbr[static_cast<std::size_t>(k)] < 0) continue;
          CHECK(st.c[static_cast<std::size_t>(k)] <= 0);
          const Vector2 d = mesh.node(st.nbr[static_cast<std::size_t>(k)]) - mesh.node(x);
          val += st.c[static_cast<std::size_t>(k)] * g.dot(d);
          scale = std::max(scale, std::abs(st.c[static_cast<std::size_t>(k)] * g.dot(d)));
        }
        CHECK(std::abs(val - g.dot(n)) <= 1e-12 * scale);
      }
      continue;
    }
    const auto second = cache.second(x);
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      if (x % 5 == 0) CHECK(second[j].nbr == select_quadrant_neighbors(mesh, x, dirs[j], r));
      double val = 0, scale = 0;
      for (std::size_t q = 0; q < 4; ++q) {
        CHECK(second[j].a[q] >= 0);
        const double du = f(mesh.node(second[j].nbr[q])) - f(mesh.node(x));
        val += second[j].a[q] * du;
        scale += std::abs(second[j].a[q] * du);
      }
      // exact for the nu-nu part plus the mixed term, which the moment set does not cancel
      const Vector2& nu = dirs[j];
      double mixed = 0;
      for (std::size_t q = 0; q < 4; ++q) {
        const Vector2 d = mesh.node(second[j].nbr[q]) - mesh.node(x);
        mixed += second[j].a[q] * d.dot(nu) * d.dot(perp(nu));
      }
      const double expect = nu.dot(A * nu) + mixed * nu.dot(A * perp(nu)) +
                            0.5 * perp(nu).dot(A * perp(nu)) * [&] {
                              double s = 0;
                              for (std::size_t q = 0; q < 4; ++q) {
                                const Vector2 d = mesh.node(second[j].nbr[q]) - mesh.node(x);
                                s += second[j].a[q] * std::pow(d.dot(perp(nu)), 2);
                              }
                              return s;
                            }();
      CHECK(std::abs(val - expect) <= 1e-10 * std::max(scale, 1.0));
    }
    for (int k = 0; k < 2; ++k) {
      const auto& ax = cache.axis(x, k);
      double val = 0, scale = 1;
      for (std::size_t q = 0; q < 4; ++q) {
        const double du = g.dot(mesh.node(ax.second.nbr[q]) - mesh.node(x));
        val += ax.b[q] * du;
        scale = std::max(scale, std::abs(ax.b[q] * du));
        if (ax.second.a[q] > 0) CHECK(std::abs(ax.b[q]) <= cache.epsilon(x) * ax.second.a[q] * (1 + 1e-12));
      }
      CHECK(std::abs(val - g(k)) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("empty quadrant is reported") {
  std::vector<Point2> nodes{Point2(0, 0), Point2(1, 0), Point2(1, 1), Point2(-1, 1), Point2(0, 1)};
  std::vector<NodeTag> tags(nodes.size(), NodeTag::Interior);
  MeshParams p = MeshParams::from_h(0.5);
  p.r = 2;
  const auto mesh = QuadMesh::from_nodes(nodes, tags, p);
  try {
    select_quadrant_neighbors(mesh, 0, Vector2(1, 0), 2.0);
    FAIL("expected EmptyQuadrant");
  } catch (const StencilError& e) {
    CHECK(e.kind() == StencilErrorKind::EmptyQuadrant);
  }
}
