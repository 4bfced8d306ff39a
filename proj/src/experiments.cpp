#include "minlag/experiments.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

namespace mlg {

AffineExact exact_affine_solution(const Matrix2& Mx, const Matrix2& My) {
  Matrix2 J;
  J << 0, -1, 1, 0;
  const Matrix2 P = Mx.inverse() * My.inverse();
  AffineExact out;
  out.theta = std::atan((P * J).trace() / P.trace());
  Matrix2 R;
  R << std::cos(out.theta), -std::sin(out.theta), std::sin(out.theta), std::cos(out.theta);
  out.A = My * R * Mx.inverse();
  if ((out.A - out.A.transpose()).norm() > 1e-10 * out.A.norm())
    throw std::invalid_argument("exact_affine_solution: M_y R M_x^{-1} is not symmetric");
  out.A = (out.A + out.A.transpose()) / 2;
  const Eigen::SelfAdjointEigenSolver<Matrix2> eig(out.A);
  out.c = std::atan(eig.eigenvalues()(0)) + std::atan(eig.eigenvalues()(1));
  return out;
}

namespace {

double exact_c(const ExperimentSpec& spec) {
  switch (spec.exact) {
    case ExactKind::Affine: return exact_affine_solution(*spec.domain_matrix, *spec.target_matrix).c;
    case ExactKind::QuadraticX: return std::numbers::pi / 4;
    default: return std::numeric_limits<double>::quiet_NaN();
  }
}

std::function<double(const Point2&)> exact_u(const ExperimentSpec& spec) {
  switch (spec.exact) {
    case ExactKind::Affine: {
      const AffineExact ex = exact_affine_solution(*spec.domain_matrix, *spec.target_matrix);
      return [ex](const Point2& x) { return ex.u(x); };
    }
    case ExactKind::QuadraticX: return [](const Point2& x) { return 0.5 * x.x() * x.x(); };
    default: return {};
  }
}

}  // namespace

LevelResult solve_level(const ExperimentSpec& spec, double h, const std::optional<std::filesystem::path>& out_prefix,
                        const LevelResult* coarse) {
  const auto start = std::chrono::steady_clock::now();
  LevelResult level;
  level.h = h;
  level.mesh = std::make_shared<const QuadMesh>(build_mesh(spec.domain, spec.mesh_params(h)));
  const QuadMesh& mesh = *level.mesh;
  const StencilCache stencils = StencilCache::build(mesh, spec.domain);
  WarmStart warm;
  if (coarse && coarse->mesh) {
    const EigenSolution& cs = coarse->solution;
    if (cs.step2_used) {
      warm.step1_u = transfer(*coarse->mesh, cs.step1_u, mesh);
      warm.step1_c = cs.step1_c;
      warm.step2_u = transfer(*coarse->mesh, cs.u, mesh);
      warm.step2_u.array() += cs.w_at_x0;
    } else {
      warm.step1_u = transfer(*coarse->mesh, cs.u, mesh);
      warm.step1_c = cs.c;
    }
  }
  level.solution = solve_full(mesh, stencils, spec.domain, spec.target, spec.solver, coarse ? &warm : nullptr);
  level.nodes = mesh.size();
  level.interior = mesh.interior_count();
  level.boundary = mesh.boundary_count();
  level.directions = stencils.directions().size();

  const EigenSolution& s = level.solution;
  SchemeContext ctx{mesh, stencils, spec.target, gradient_bound_R(spec.target), s.kappa_used, s.x0};
  level.feasibility = eikonal_feasibility(ctx, s.u);
  level.u_at_x0 = s.u(s.x0);
  const auto grad = extract_map(ctx, s.u);
  level.containment = -std::numeric_limits<double>::infinity();
  for (NodeId x = 0; x < static_cast<NodeId>(mesh.size()); ++x)
    if (mesh.is_interior(x))
      level.containment = std::max(level.containment, spec.target.signed_distance(grad[static_cast<std::size_t>(x)]));

  if (const auto ue = exact_u(spec)) {
    const double shift = s.u(s.x0) - ue(mesh.node(s.x0));
    double err = 0;
    for (NodeId x = 0; x < static_cast<NodeId>(mesh.size()); ++x)
      err = std::max(err, std::abs(s.u(x) - ue(mesh.node(x)) - shift));
    level.error = err;
  }
  level.metrics = realized_metrics(mesh, spec.domain);
  if (out_prefix) {
    write_solution_csv(mesh, s.u, grad, out_prefix->string() + "_solution.csv");
    write_solution_json(s, level.metrics.h, out_prefix->string() + "_solution.json");
  }
  level.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return level;
}

std::vector<ConvergenceRow> convergence_rows(const std::vector<LevelResult>& levels, double c_exact) {
  std::vector<ConvergenceRow> rows;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    ConvergenceRow row;
    row.h = levels[i].h;
    row.error = levels[i].error;
    row.c = levels[i].solution.c;
    row.c_error = std::abs(row.c - c_exact);
    if (i > 0) {
      row.ratio = levels[i - 1].error / levels[i].error;
      row.order = std::log(row.ratio) / std::log(levels[i - 1].h / levels[i].h);
    }
    rows.push_back(row);
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const std::optional<std::filesystem::path>& out_dir,
                                const ProgressFn& progress) {
  spec.validate();
  if (out_dir) std::filesystem::create_directories(*out_dir);
  ExperimentResult result;
  for (std::size_t k = 0; k < spec.ladder.size(); ++k) {
    const double h = spec.ladder[k];
    std::optional<std::filesystem::path> prefix;
    if (out_dir) prefix = *out_dir / ("level" + std::to_string(k));
    try {
      const LevelResult* coarse = spec.warm_start && !result.levels.empty() ? &result.levels.back() : nullptr;
      result.levels.push_back(solve_level(spec, h, prefix, coarse));
    } catch (const std::exception& e) {
      result.failure = "h=" + std::to_string(h) + ": " + e.what();
      if (progress) progress(result.failure);
      break;
    }
    if (progress) {
      const auto& l = result.levels.back();
      char buf[256];
      std::snprintf(buf, sizeof buf, "h=%.6g nodes=%zu iters=%d c=%.8f error=%.4e step2=%d time=%.1fs", h, l.nodes,
                    l.solution.iterations, l.solution.c, l.error, l.solution.step2_used ? 1 : 0, l.seconds);
      progress(buf);
    }
  }
  result.rows = convergence_rows(result.levels, exact_c(spec));
  if (out_dir) write_convergence_csv(result.rows, *out_dir / "convergence.csv");
  return result;
}

PoissonResult poisson_1d_demo(int N, double f_scale) {
  if (N < 3) throw std::invalid_argument("poisson_1d_demo: N must be at least 3");
  const double h = 1.0 / N;
  const double pi = std::numbers::pi;
  auto f = [&](double x) { return f_scale * std::cos(pi * x / 2); };
  auto g = [&](double x) { return (2 / pi) * std::sin(pi * x / 2); };
  // Unknowns u_0..u_N then c; rows: interior, two boundary, normalization.
  const int n = N + 2;
  std::vector<Eigen::Triplet<double>> t;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int j = 1; j < N; ++j) {
    t.emplace_back(j, j - 1, -1 / (h * h));
    t.emplace_back(j, j, 2 / (h * h));
    t.emplace_back(j, j + 1, -1 / (h * h));
    t.emplace_back(j, N + 1, f(j * h));
  }
  t.emplace_back(0, 1, 1 / h);
  t.emplace_back(0, 0, -1 / h);
  rhs(0) = g(0);
  t.emplace_back(N, N, 1 / h);
  t.emplace_back(N, N - 1, -1 / h);
  rhs(N) = g(1);
  t.emplace_back(N + 1, 0, 1.0);
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("poisson_1d_demo: singular system");
  const Eigen::VectorXd sol = lu.solve(rhs);

  PoissonResult out;
  out.x = Eigen::VectorXd::LinSpaced(N + 1, 0.0, 1.0);
  out.u = sol.head(N + 1);
  out.c = sol(N + 1);
  // The exact potential for f_scale = 1; with other scales c absorbs the factor.
  auto ue = [&](double x) { return -(4 / (pi * pi)) * std::cos(pi * x / 2); };
  for (int j = 0; j <= N; ++j) out.error = std::max(out.error, std::abs(out.u(j) - (ue(j * h) - ue(0))));
  return out;
}

std::vector<GalleryRun> run_shape_gallery(double h, const std::optional<std::filesystem::path>& out_dir,
                                          const ProgressFn& progress) {
  const ConvexBodyd square = ConvexBodyd::square(Point2::Zero(), 1.1);
  const ConvexBodyd disk = ConvexBodyd::disk(Point2::Zero(), 1.0);
  struct Case {
    const char* name;
    ConvexBodyd domain;
    ConvexBodyd target;
  };
  const std::vector<Case> cases{{"square-to-bowl", square, shapes::bowl()},
                                {"square-to-cone", square, shapes::ice_cream_cone()},
                                {"square-to-pentagon", square, shapes::pentagon()},
                                {"square-to-disk", square, disk},
                                {"disk-to-square", disk, square}};
  if (out_dir) std::filesystem::create_directories(*out_dir);
  std::vector<GalleryRun> runs;
  for (const auto& c : cases) {
    ExperimentSpec spec;
    spec.name = c.name;
    spec.domain = c.domain;
    spec.target = c.target;
    spec.ladder = {h};
    GalleryRun run;
    run.name = c.name;
    try {
      std::optional<std::filesystem::path> prefix;
      if (out_dir) prefix = *out_dir / c.name;
      run.level = solve_level(spec, h, prefix);
    } catch (const std::exception& e) {
      run.failure = e.what();
    }
    if (progress) {
      char buf[256];
      if (run.failure.empty()) {
        std::snprintf(buf, sizeof buf, "%s: c=%.6f containment=%.3e iters=%d step2=%d", c.name, run.level.solution.c,
                      run.level.containment, run.level.solution.iterations, run.level.solution.step2_used ? 1 : 0);
      } else {
        std::snprintf(buf, sizeof buf, "%s: FAILED %s", c.name, run.failure.c_str());
      }
      progress(buf);
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

}  // namespace mlg
