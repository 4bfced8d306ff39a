#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "minlag/operators.hpp"

namespace mlg {

enum class SolverErrorKind { MaxIterations, LinearSolveFailure, StagnatedLineSearch, InvalidInput };

const char* to_string(SolverErrorKind kind);

class SolverError : public std::runtime_error {
 public:
  SolverError(SolverErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  SolverErrorKind kind() const { return kind_; }

 private:
  SolverErrorKind kind_;
};

/// When the constrained second system is solved after step 1.
enum class KappaMode { Auto, Never, Always };

KappaMode kappa_mode_from_string(const std::string& s);
const char* to_string(KappaMode m);

/// Direct is sparse LU. Iterative is ILUT-preconditioned GMRES, checked
/// against a relative residual of 1e-10 and backed by LU if it misses.
/// Auto picks iterative above `direct_limit` unknowns.
enum class LinearSolverKind { Auto, Direct, Iterative };

LinearSolverKind linear_solver_from_string(const std::string& s);
const char* to_string(LinearSolverKind k);

struct NewtonConfig {
  int max_iterations = 100;
  double tol = 1e-8;          // sup norm of the residual
  double backtrack = 0.5;
  double min_step = 1e-6;
  // A trial step is accepted if it lowers the l2 residual below the largest
  // of the last `nonmonotone_window` iterates. 1 is a plain monotone search.
  int nonmonotone_window = 1;
  KappaMode kappa_mode = KappaMode::Auto;
  LinearSolverKind linear_solver = LinearSolverKind::Auto;
  Eigen::Index direct_limit = 2000;

  void validate() const;
};

struct EigenSolution {
  GridFunction u;
  double c = 0.0;
  int iterations = 0;
  double residual = 0.0;
  std::vector<Branch> branch;
  bool step2_used = false;
  double kappa_used = 0.0;
  NodeId x0 = 0;
  /// Sup norm of the constrained scheme (kappa = 0) at the step-1 solution.
  double step2_check = 0.0;
  /// Step-1 solution, kept when step 2 ran (reused by warm starts).
  GridFunction step1_u;
  double step1_c = 0.0;
  /// Level of the step-2 iterate at x0 before u was shifted to vanish there.
  double w_at_x0 = 0.0;
};

/// Starting points for solve_full, e.g. a coarser solution transferred to
/// this mesh. Empty members fall back to the default.
struct WarmStart {
  GridFunction step1_u;
  double step1_c = 0.0;
  GridFunction step2_u;  // unshifted step-2 iterate
};

/// Newton matrix over (u at every node, c) and right-hand side -G.
struct SparseSystem {
  Eigen::SparseMatrix<double> J;
  Eigen::VectorXd rhs;
};

/// Residual of the square system used by Newton. Scheme 1 is eval_scheme1;
/// scheme 2 appends the row c - c_pin, which holds c at the step-1 value.
Residual newton_residual(const SchemeContext& ctx, int scheme, const GridFunction& u, double c, double c_pin);

/// Generalized Jacobian: each row differentiates its active branch, with the
/// active extreme directions, boundary direction and Eikonal neighbor.
SparseSystem assemble_generalized_jacobian(const SchemeContext& ctx, const GridFunction& u, double c, int scheme,
                                           double c_pin = 0.0);

/// Solves J x = rhs as configured. Throws SolverError(LinearSolveFailure).
Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& J, const Eigen::VectorXd& rhs, const NewtonConfig& config);

/// Damped nonsmooth Newton on scheme 1 or 2. Throws SolverError.
EigenSolution newton_solve(const SchemeContext& ctx, int scheme, const GridFunction& initial, double initial_c,
                           const NewtonConfig& config);

/// u0 = s/2 |x - centroid|^2 shifted to vanish at x0, c0 = 2 atan(s), with
/// s = max|Y| / max|X|.
std::pair<GridFunction, double> initial_guess(const QuadMesh& mesh, const ConvexBodyd& domain,
                                              const ConvexBodyd& target, NodeId x0);

/// Interior node nearest the domain centroid.
NodeId normalization_node(const QuadMesh& mesh, const ConvexBodyd& domain);

/// Two-step driver on a prebuilt mesh.
EigenSolution solve_full(const QuadMesh& mesh, const StencilCache& stencils, const ConvexBodyd& domain,
                         const ConvexBodyd& target, const NewtonConfig& config, const WarmStart* warm = nullptr);

/// Values of u (given on `from`) at the nodes of `to`, by a local
/// least-squares quadratic fit over nearby nodes of `from`.
GridFunction transfer(const QuadMesh& from, const GridFunction& u, const QuadMesh& to);

struct SolveRun {
  QuadMesh mesh;
  StencilCache stencils;
  EigenSolution solution;
};

SolveRun solve_full(const ConvexBodyd& domain, const ConvexBodyd& target, const MeshParams& params,
                    const NewtonConfig& config, const StencilOptions& stencil_options = {});

/// Discrete gradient per node: centered differences inside, least squares
/// over the boundary-stencil neighbors on the boundary.
std::vector<Vector2> extract_map(const SchemeContext& ctx, const GridFunction& u);

void write_solution_csv(const QuadMesh& mesh, const GridFunction& u, const std::vector<Vector2>& grad,
                        const std::filesystem::path& path);
void write_solution_json(const EigenSolution& s, double realized_h, const std::filesystem::path& path);

}  // namespace mlg
