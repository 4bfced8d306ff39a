#include <doctest.h>

#include <cmath>
#include <numbers>

#include "minlag/eigensolver.hpp"
#include "property_checks.hpp"

using namespace mlg;
using doctest::Approx;

TEST_CASE("option strings") {
  CHECK(kappa_mode_from_string("always") == KappaMode::Always);
  CHECK(std::string(to_string(KappaMode::Never)) == "never");
  CHECK_THROWS(kappa_mode_from_string("sometimes"));
  CHECK(linear_solver_from_string("iterative") == LinearSolverKind::Iterative);
  NewtonConfig bad;
  bad.backtrack = 1.5;
  CHECK_THROWS_AS(bad.validate(), SolverError);
}

TEST_CASE("jacobian rows match finite differences") {
  const checks::Problem pb(ConvexBodyd::disk(Point2::Zero(), 1.0), shapes::pentagon(), 0.1375);
  for (int scheme : {1, 2}) {
    const auto audit = checks::jacobian_audit(pb, scheme, 200, 9 + static_cast<std::uint64_t>(scheme));
    INFO("scheme " << scheme << " worst " << audit.worst);
    CHECK(audit.fraction() >= 0.95);
  }
}

TEST_CASE("normalization and pin rows") {
  const checks::Problem pb(ConvexBodyd::disk(Point2::Zero(), 1.0), ConvexBodyd::disk(Point2::Zero(), 1.0), 0.2625);
  const auto ctx = pb.context();
  auto [u, c] = initial_guess(pb.mesh, pb.domain, pb.target, pb.x0);
  CHECK(u(pb.x0) == 0.0);
  CHECK(c == Approx(std::numbers::pi / 2));
  const auto n = static_cast<Eigen::Index>(pb.mesh.size());
  for (int scheme : {1, 2}) {
    const auto sys = assemble_generalized_jacobian(ctx, u, c, scheme, c);
    REQUIRE(sys.J.rows() == n + 1);
    REQUIRE(sys.J.cols() == n + 1);
    const Eigen::SparseMatrix<double, Eigen::RowMajor> rows = sys.J;
    CHECK(rows.row(n).nonZeros() == 1);
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, n); it; ++it)
      CHECK(it.col() == (scheme == 1 ? pb.x0 : n));
  }
}

TEST_CASE("iterative and direct linear solves agree") {
  const checks::Problem pb(ConvexBodyd::disk(Point2::Zero(), 1.0), shapes::bowl(), 0.06875);
  const auto ctx = pb.context();
  auto [u, c] = initial_guess(pb.mesh, pb.domain, pb.target, pb.x0);
  const auto sys = assemble_generalized_jacobian(ctx, u, c, 1, c);
  NewtonConfig direct, iterative;
  direct.linear_solver = LinearSolverKind::Direct;
  iterative.linear_solver = LinearSolverKind::Iterative;
  const Eigen::VectorXd a = solve_linear(sys.J, sys.rhs, direct);
  const Eigen::VectorXd b = solve_linear(sys.J, sys.rhs, iterative);
  CHECK((sys.J * b - sys.rhs).norm() <= 1e-10 * sys.rhs.norm());
  CHECK((a - b).norm() <= 1e-6 * a.norm());
}

TEST_CASE("disk to disk: solution near |x|^2/2 with c near pi/2") {
  const auto disk = ConvexBodyd::disk(Point2::Zero(), 1.0);
  const auto run = solve_full(disk, disk, MeshParams::from_h(0.13125), NewtonConfig{});
  const auto& s = run.solution;
  CHECK(s.residual <= 1e-8);
  CHECK(s.u(s.x0) == 0.0);
  CHECK(std::abs(s.c - std::numbers::pi / 2) < 0.15);
  double err = 0;
  const double shift = 0.5 * run.mesh.node(s.x0).squaredNorm();
  for (NodeId x = 0; x < static_cast<NodeId>(run.mesh.size()); ++x)
    err = std::max(err, std::abs(s.u(x) - 0.5 * run.mesh.node(x).squaredNorm() + shift));
  CHECK(err < 0.1);
  SchemeContext ctx{run.mesh, run.stencils, disk, gradient_bound_R(disk), s.kappa_used, s.x0};
  CHECK(eikonal_feasibility(ctx, s.u).ok);
  // reruns are bit-identical
  const auto again = solve_full(disk, disk, MeshParams::from_h(0.13125), NewtonConfig{});
  CHECK(again.solution.c == s.c);
  CHECK((again.solution.u.array() == s.u.array()).all());
}

TEST_CASE("max iterations is reported") {
  const auto disk = ConvexBodyd::disk(Point2::Zero(), 1.0);
  NewtonConfig cfg;
  cfg.max_iterations = 1;
  try {
    solve_full(disk, shapes::pentagon(), MeshParams::from_h(0.13125), cfg);
    FAIL("expected MaxIterations");
  } catch (const SolverError& e) {
    CHECK(e.kind() == SolverErrorKind::MaxIterations);
  }
}

TEST_CASE("transfer reproduces quadratics") {
  const auto disk = ConvexBodyd::disk(Point2::Zero(), 1.0);
  const auto coarse = build_mesh(disk, MeshParams::from_h(0.1375));
  const auto fine = build_mesh(disk, MeshParams::from_h(0.06875));
  auto f = [](const Point2& p) { return 0.3 + p.x() - 2 * p.y() + 0.7 * p.x() * p.x() - 0.2 * p.x() * p.y() + p.y() * p.y(); };
  GridFunction u(static_cast<Eigen::Index>(coarse.size()));
  for (NodeId x = 0; x < static_cast<NodeId>(coarse.size()); ++x) u(x) = f(coarse.node(x));
  const GridFunction v = transfer(coarse, u, fine);
  double err = 0;
  for (NodeId x = 0; x < static_cast<NodeId>(fine.size()); ++x) err = std::max(err, std::abs(v(x) - f(fine.node(x))));
  CHECK(err < 1e-10);
  CHECK_THROWS(transfer(fine, u, coarse));
}

TEST_CASE("warm start converges to the cold-start solution") {
  const auto disk = ConvexBodyd::disk(Point2::Zero(), 1.0);
  const auto seg = ConvexBodyd::segment(Point2(-1, 0), Point2(1, 0));
  NewtonConfig cfg;
  cfg.tol = 1e-10;
  const auto coarse = solve_full(disk, seg, MeshParams::from_h(0.1375), cfg);
  REQUIRE(coarse.solution.step2_used);
  const auto fine = solve_full(disk, seg, MeshParams::from_h(0.06875), cfg);
  WarmStart warm;
  warm.step1_u = transfer(coarse.mesh, coarse.solution.step1_u, fine.mesh);
  warm.step1_c = coarse.solution.step1_c;
  warm.step2_u = transfer(coarse.mesh, coarse.solution.u, fine.mesh);
  warm.step2_u.array() += coarse.solution.w_at_x0;
  const auto again = solve_full(fine.mesh, fine.stencils, disk, seg, cfg, &warm);
  CHECK(again.step2_used);
  CHECK(again.c == Approx(fine.solution.c).epsilon(1e-12));
  CHECK((again.u - fine.solution.u).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("adding a constant to the initial guess does not change the solution") {
  const checks::Problem pb(ConvexBodyd::disk(Point2::Zero(), 1.0), shapes::pentagon(), 0.1375);
  const auto ctx = pb.context();
  auto [u0, c0] = initial_guess(pb.mesh, pb.domain, pb.target, pb.x0);
  NewtonConfig cfg;
  cfg.tol = 1e-11;
  const auto a = newton_solve(ctx, 1, u0, c0, cfg);
  const auto b = newton_solve(ctx, 1, (u0.array() + 5.0).matrix(), c0, cfg);
  CHECK((a.u - b.u).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(std::abs(a.c - b.c) <= 1e-8);
}

TEST_CASE("nonmonotone window must be positive") {
  NewtonConfig cfg;
  cfg.nonmonotone_window = 0;
  CHECK_THROWS_AS(cfg.validate(), SolverError);
}
