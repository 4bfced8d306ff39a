#include "minlag/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>
#include <json.hpp>

namespace mlg {

const char* to_string(SolverErrorKind kind) {
  switch (kind) {
    case SolverErrorKind::MaxIterations: return "MaxIterations";
    case SolverErrorKind::LinearSolveFailure: return "LinearSolveFailure";
    case SolverErrorKind::StagnatedLineSearch: return "StagnatedLineSearch";
    case SolverErrorKind::InvalidInput: return "InvalidInput";
  }
  return "unknown";
}

KappaMode kappa_mode_from_string(const std::string& s) {
  if (s == "auto") return KappaMode::Auto;
  if (s == "never") return KappaMode::Never;
  if (s == "always") return KappaMode::Always;
  throw SolverError(SolverErrorKind::InvalidInput, "unknown kappa_mode '" + s + "' (auto|never|always)");
}

const char* to_string(KappaMode m) {
  switch (m) {
    case KappaMode::Auto: return "auto";
    case KappaMode::Never: return "never";
    case KappaMode::Always: return "always";
  }
  return "auto";
}

void NewtonConfig::validate() const {
  if (!(tol > 0)) throw SolverError(SolverErrorKind::InvalidInput, "tolerance must be positive");
  if (!(backtrack > 0 && backtrack < 1)) throw SolverError(SolverErrorKind::InvalidInput, "backtrack must lie in (0,1)");
  if (!(min_step > 0 && min_step <= 1)) throw SolverError(SolverErrorKind::InvalidInput, "min_step must lie in (0,1]");
  if (max_iterations < 1) throw SolverError(SolverErrorKind::InvalidInput, "max_iterations must be positive");
  if (nonmonotone_window < 1) throw SolverError(SolverErrorKind::InvalidInput, "nonmonotone_window must be at least 1");
}

Residual newton_residual(const SchemeContext& ctx, int scheme, const GridFunction& u, double c, double c_pin) {
  if (scheme == 1) return eval_scheme1(ctx, u, c);
  Residual r = eval_scheme2(ctx, u, c);
  const auto n = r.values.size();
  r.values.conservativeResize(n + 1);
  r.values(n) = c - c_pin;
  r.branch.push_back(Branch::N);
  return r;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_second(Triplets& t, Eigen::Index row, NodeId x, const SecondDerivStencil& s, double w) {
  double diag = 0;
  for (std::size_t q = 0; q < 4; ++q) {
    t.emplace_back(row, s.nbr[q], w * s.a[q]);
    diag -= w * s.a[q];
  }
  t.emplace_back(row, x, diag);
}

void add_F(const SchemeContext& ctx, Triplets& t, Eigen::Index row, NodeId x, const LambdaExtremes& l,
           Eigen::Index c_col) {
  const auto st = ctx.stencils.second(x);
  add_second(t, row, x, st[l.argmin], -1.0 / (1.0 + l.lambda1 * l.lambda1));
  add_second(t, row, x, st[l.argmax], -1.0 / (1.0 + l.lambda2 * l.lambda2));
  t.emplace_back(row, c_col, 1.0);
}

void add_H_interior(const SchemeContext& ctx, Triplets& t, Eigen::Index row, NodeId x, const GridFunction& u) {
  const auto hv = eval_H_interior(ctx, u, x);
  const Vector2 dh = ctx.target.signed_distance_gradient(hv.gradient);
  for (int k = 0; k < 2; ++k) {
    const AxisStencil& ax = ctx.stencils.axis(x, k);
    double diag = 0;
    for (std::size_t q = 0; q < 4; ++q) {
      const double w = dh(k) * ax.b[q] - hv.epsilon * ax.second.a[q];
      t.emplace_back(row, ax.second.nbr[q], w);
      diag -= w;
    }
    t.emplace_back(row, x, diag);
  }
}

void add_E(const SchemeContext& ctx, Triplets& t, Eigen::Index row, NodeId x, const GridFunction& u) {
  const auto e = eval_E(ctx, u, x);
  const double inv = 1.0 / (ctx.mesh.node(e.argmax) - ctx.mesh.node(x)).norm();
  t.emplace_back(row, x, inv);
  t.emplace_back(row, e.argmax, -inv);
}

void add_H_boundary(const SchemeContext& ctx, Triplets& t, Eigen::Index row, NodeId x, const GridFunction& u,
                    double kappa) {
  const auto bh = eval_H_boundary(ctx, u, x);
  const auto& s = ctx.stencils.boundary(x)[bh.active];
  double diag = kappa;
  for (std::size_t i = 0; i < 2; ++i) {
    if (s.nbr[i] < 0) continue;
    t.emplace_back(row, s.nbr[i], s.c[i]);
    diag -= s.c[i];
  }
  t.emplace_back(row, x, diag);
}

}  // namespace

SparseSystem assemble_generalized_jacobian(const SchemeContext& ctx, const GridFunction& u, double c, int scheme,
                                           double c_pin) {
  const auto n = static_cast<Eigen::Index>(ctx.mesh.size());
  const Residual r = newton_residual(ctx, scheme, u, c, c_pin);
  Triplets t;
  t.reserve(static_cast<std::size_t>(n) * 10 + 2);
  for (NodeId x = 0; x < n; ++x) {
    const Branch b = r.branch[static_cast<std::size_t>(x)];
    if (ctx.mesh.is_interior(x)) {
      switch (b) {
        case Branch::F: add_F(ctx, t, x, x, eval_lambda_extremes(ctx, u, x), n); break;
        case Branch::L: add_second(t, x, x, ctx.stencils.second(x)[eval_lambda_extremes(ctx, u, x).argmin], -1.0); break;
        case Branch::H: add_H_interior(ctx, t, x, x, u); break;
        case Branch::E: add_E(ctx, t, x, x, u); break;
        case Branch::N: break;
      }
    } else if (b == Branch::E) {
      add_E(ctx, t, x, x, u);
    } else {
      add_H_boundary(ctx, t, x, x, u, scheme == 2 ? ctx.kappa : 0.0);
    }
  }
  if (scheme == 1) {
    t.emplace_back(n, ctx.x0, 1.0);
  } else {
    t.emplace_back(n, n, 1.0);
  }
  SparseSystem sys;
  sys.J.resize(n + 1, n + 1);
  sys.J.setFromTriplets(t.begin(), t.end());
  sys.rhs = -r.values;
  return sys;
}

LinearSolverKind linear_solver_from_string(const std::string& s) {
  if (s == "auto") return LinearSolverKind::Auto;
  if (s == "direct") return LinearSolverKind::Direct;
  if (s == "iterative") return LinearSolverKind::Iterative;
  throw std::invalid_argument("unknown linear_solver '" + s + "' (auto|direct|iterative)");
}

const char* to_string(LinearSolverKind k) {
  switch (k) {
    case LinearSolverKind::Auto: return "auto";
    case LinearSolverKind::Direct: return "direct";
    case LinearSolverKind::Iterative: return "iterative";
  }
  return "auto";
}

namespace {

Eigen::VectorXd solve_direct(const Eigen::SparseMatrix<double>& J, const Eigen::VectorXd& rhs) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(J);
  if (lu.info() != Eigen::Success)
    throw SolverError(SolverErrorKind::LinearSolveFailure, "newton_solve: factorization failed: " + lu.lastErrorMessage());
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite())
    throw SolverError(SolverErrorKind::LinearSolveFailure, "newton_solve: linear solve failed");
  return x;
}

}  // namespace

Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& J, const Eigen::VectorXd& rhs, const NewtonConfig& config) {
  const bool iterative = config.linear_solver == LinearSolverKind::Iterative ||
                         (config.linear_solver == LinearSolverKind::Auto && J.rows() > config.direct_limit);
  if (!iterative) return solve_direct(J, rhs);
  constexpr double rel_tol = 1e-10;
  Eigen::GMRES<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> gmres;
  gmres.preconditioner().setDroptol(1e-4);
  gmres.preconditioner().setFillfactor(20);
  gmres.set_restart(150);
  gmres.setMaxIterations(600);
  gmres.setTolerance(rel_tol / 10);
  gmres.compute(J);
  if (gmres.info() == Eigen::Success) {
    // GMRES stops on the preconditioned residual; refine against the true one.
    const double target = rel_tol * std::max(rhs.norm(), 1e-300);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
    Eigen::VectorXd res = rhs;
    for (int pass = 0; pass < 4 && x.allFinite(); ++pass) {
      x += gmres.solve(res);
      res = rhs - J * x;
      if (res.norm() <= target) return x;
    }
  }
  return solve_direct(J, rhs);
}

EigenSolution newton_solve(const SchemeContext& ctx, int scheme, const GridFunction& initial, double initial_c,
                           const NewtonConfig& config) {
  config.validate();
  const auto n = static_cast<Eigen::Index>(ctx.mesh.size());
  if (initial.size() != n || !initial.allFinite() || !std::isfinite(initial_c))
    throw SolverError(SolverErrorKind::InvalidInput, "newton_solve: initial guess must be finite with one value per node");
  if (scheme != 1 && scheme != 2) throw SolverError(SolverErrorKind::InvalidInput, "newton_solve: scheme must be 1 or 2");

  const double c_pin = initial_c;
  GridFunction u = initial;
  double c = initial_c;
  Residual r = newton_residual(ctx, scheme, u, c, c_pin);
  std::deque<double> history{r.values.norm()};
  int it = 0;
  for (; r.sup_norm() > config.tol; ++it) {
    if (it >= config.max_iterations)
      throw SolverError(SolverErrorKind::MaxIterations, "newton_solve: no convergence in " +
                                                            std::to_string(config.max_iterations) +
                                                            " iterations (residual " + std::to_string(r.sup_norm()) + ")");
    const SparseSystem sys = assemble_generalized_jacobian(ctx, u, c, scheme, c_pin);
    const Eigen::VectorXd step = solve_linear(sys.J, sys.rhs, config);

    const double merit = *std::max_element(history.begin(), history.end());
    double t = 1.0;
    for (;;) {
      const GridFunction u_trial = u + t * step.head(n);
      const double c_trial = c + t * step(n);
      Residual r_trial = newton_residual(ctx, scheme, u_trial, c_trial, c_pin);
      if (r_trial.values.norm() < merit || r_trial.sup_norm() <= config.tol) {
        u = u_trial;
        c = c_trial;
        r = std::move(r_trial);
        history.push_back(r.values.norm());
        if (static_cast<int>(history.size()) > config.nonmonotone_window) history.pop_front();
        break;
      }
      t *= config.backtrack;
      if (t < config.min_step)
        throw SolverError(SolverErrorKind::StagnatedLineSearch,
                          "newton_solve: line search stagnated at residual " + std::to_string(r.sup_norm()));
    }
  }
  EigenSolution s;
  s.u = std::move(u);
  s.c = c;
  s.iterations = it;
  s.residual = r.sup_norm();
  s.branch = std::move(r.branch);
  s.x0 = ctx.x0;
  return s;
}

NodeId normalization_node(const QuadMesh& mesh, const ConvexBodyd& domain) {
  return mesh.nearest_interior(domain.centroid());
}

std::pair<GridFunction, double> initial_guess(const QuadMesh& mesh, const ConvexBodyd& domain,
                                              const ConvexBodyd& target, NodeId x0) {
  const double s = target.max_norm() / domain.max_norm();
  const Point2 center = domain.centroid();
  GridFunction u(static_cast<Eigen::Index>(mesh.size()));
  for (NodeId x = 0; x < static_cast<NodeId>(mesh.size()); ++x) u(x) = 0.5 * s * (mesh.node(x) - center).squaredNorm();
  u.array() -= u(x0);
  return {u, 2 * std::atan(s)};
}

EigenSolution solve_full(const QuadMesh& mesh, const StencilCache& stencils, const ConvexBodyd& domain,
                         const ConvexBodyd& target, const NewtonConfig& config, const WarmStart* warm) {
  const NodeId x0 = normalization_node(mesh, domain);
  SchemeContext ctx{mesh, stencils, target, gradient_bound_R(target), 0.0, x0};
  auto [u0, c0] = initial_guess(mesh, domain, target, x0);
  const auto n = static_cast<Eigen::Index>(mesh.size());
  if (warm && warm->step1_u.size() == n) {
    u0 = warm->step1_u;
    u0.array() -= u0(x0);
    c0 = warm->step1_c;
  }

  EigenSolution v = newton_solve(ctx, 1, u0, c0, config);
  v.step2_check = eval_scheme2(ctx, v.u, v.c).sup_norm();
  const bool need_step2 =
      config.kappa_mode == KappaMode::Always || (config.kappa_mode == KappaMode::Auto && v.step2_check > config.tol);
  if (!need_step2) {
    v.u.array() -= v.u(x0);
    return v;
  }

  ctx.kappa = std::sqrt(mesh.params().h);
  GridFunction w0 = v.u;
  if (warm && warm->step2_u.size() == n) w0 = warm->step2_u;
  EigenSolution w = newton_solve(ctx, 2, w0, v.c, config);
  w.w_at_x0 = w.u(x0);
  w.u.array() -= w.w_at_x0;
  w.iterations += v.iterations;
  w.step2_used = true;
  w.kappa_used = ctx.kappa;
  w.step2_check = v.step2_check;
  w.step1_u = std::move(v.u);
  w.step1_c = v.c;
  return w;
}

GridFunction transfer(const QuadMesh& from, const GridFunction& u, const QuadMesh& to) {
  if (u.size() != static_cast<Eigen::Index>(from.size()) || from.size() < 6)
    throw std::invalid_argument("transfer: grid function does not match the source mesh");
  const double base = 2.5 * from.params().h;
  GridFunction out(static_cast<Eigen::Index>(to.size()));
  std::vector<NodeId> near;
  for (NodeId x = 0; x < static_cast<NodeId>(to.size()); ++x) {
    const Point2& p = to.node(x);
    double rho = base;
    for (;; rho *= 1.5) {
      near.clear();
      from.index().visit_ball(p, rho, [&](NodeId y) { near.push_back(y); });
      if (near.size() >= 12) break;
    }
    // weighted fit in scaled local coordinates, value at the center
    Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> b = Eigen::Matrix<double, 6, 1>::Zero();
    for (const NodeId y : near) {
      const Vector2 d = (from.node(y) - p) / rho;
      const double wt = 1.0 - 0.5 * d.squaredNorm();
      Eigen::Matrix<double, 6, 1> phi;
      phi << 1, d.x(), d.y(), d.x() * d.x(), d.x() * d.y(), d.y() * d.y();
      A += wt * phi * phi.transpose();
      b += wt * u(y) * phi;
    }
    out(x) = A.ldlt().solve(b)(0);
  }
  return out;
}

SolveRun solve_full(const ConvexBodyd& domain, const ConvexBodyd& target, const MeshParams& params,
                    const NewtonConfig& config, const StencilOptions& stencil_options) {
  SolveRun run;
  run.mesh = build_mesh(domain, params);
  run.stencils = StencilCache::build(run.mesh, domain, stencil_options);
  run.solution = solve_full(run.mesh, run.stencils, domain, target, config);
  return run;
}

std::vector<Vector2> extract_map(const SchemeContext& ctx, const GridFunction& u) {
  std::vector<Vector2> grad(ctx.mesh.size(), Vector2::Zero());
  for (NodeId x = 0; x < static_cast<NodeId>(ctx.mesh.size()); ++x) {
    if (ctx.mesh.is_interior(x)) {
      grad[static_cast<std::size_t>(x)] = eval_H_interior(ctx, u, x).gradient;
      continue;
    }
    std::vector<NodeId> nbrs;
    for (const auto& s : ctx.stencils.boundary(x))
      for (const NodeId y : s.nbr)
        if (y >= 0) nbrs.push_back(y);
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    Matrix2 A = Matrix2::Zero();
    Vector2 b = Vector2::Zero();
    for (const NodeId y : nbrs) {
      const Vector2 d = ctx.mesh.node(y) - ctx.mesh.node(x);
      A += d * d.transpose();
      b += d * (u(y) - u(x));
    }
    if (std::abs(A.determinant()) > 1e-14 * A.squaredNorm()) grad[static_cast<std::size_t>(x)] = A.ldlt().solve(b);
  }
  return grad;
}

void write_solution_csv(const QuadMesh& mesh, const GridFunction& u, const std::vector<Vector2>& grad,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# schema: minlag-solution v1\n";
  out << "node_id,x,y,tag,u,grad_x,grad_y\n";
  out.precision(17);
  for (NodeId x = 0; x < static_cast<NodeId>(mesh.size()); ++x) {
    const auto& g = grad[static_cast<std::size_t>(x)];
    out << x << ',' << mesh.node(x).x() << ',' << mesh.node(x).y() << ',' << to_string(mesh.tag(x)) << ',' << u(x)
        << ',' << g.x() << ',' << g.y() << '\n';
  }
}

void write_solution_json(const EigenSolution& s, double realized_h, const std::filesystem::path& path) {
  nlohmann::json j;
  j["c"] = s.c;
  j["iterations"] = s.iterations;
  j["residual"] = s.residual;
  j["step2_used"] = s.step2_used;
  j["kappa_used"] = s.kappa_used;
  j["realized_h"] = realized_h;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace mlg
