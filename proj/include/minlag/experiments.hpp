#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "minlag/eigensolver.hpp"

namespace mlg {

enum class ExactKind { None, Affine, QuadraticX, Poisson1D };

ExactKind exact_kind_from_string(const std::string& s);
const char* to_string(ExactKind k);

struct ExperimentSpec {
  std::string name = "experiment";
  ConvexBodyd domain = ConvexBodyd::disk(Point2::Zero(), 1.0);
  ConvexBodyd target = ConvexBodyd::disk(Point2::Zero(), 1.0);
  // Ellipse matrices, recorded when the shapes are given that way.
  std::optional<Matrix2> domain_matrix;
  std::optional<Matrix2> target_matrix;
  std::vector<double> ladder;
  double c_theta = 1.0;
  double c_r = 2.0;
  double delta_factor = 0.5;
  double hB_exponent = 1.5;
  NewtonConfig solver;
  // Start each ladder level from the previous level's solution.
  bool warm_start = false;
  ExactKind exact = ExactKind::None;

  MeshParams mesh_params(double h) const {
    return MeshParams::from_h(h, c_theta, c_r, delta_factor, hB_exponent);
  }
  void validate() const;
};

/// Parses the JSON experiment format (see README).
ExperimentSpec parse_experiment(const std::string& json_text);
ExperimentSpec load_experiment(const std::filesystem::path& path);
/// Shape from its JSON description, e.g. {"kind":"disk","center":[0,0],"radius":1}.
ConvexBodyd parse_shape(const std::string& json_text);

/// Ellipse M_x B to ellipse M_y B (the affine-map benchmark).
ExperimentSpec affine_experiment();
/// Unit disk to the segment [-1,1] x {0}; exact potential x^2/2.
ExperimentSpec segment_experiment();

struct AffineExact {
  double theta = 0.0;
  Matrix2 A = Matrix2::Identity();  // Hessian of the exact potential
  double c = 0.0;
  double u(const Point2& x) const { return 0.5 * x.dot(A * x); }
};

/// Exact solution for ellipse-to-ellipse: grad u = M_y R_theta M_x^{-1} x.
AffineExact exact_affine_solution(const Matrix2& Mx, const Matrix2& My);

struct ConvergenceRow {
  double h = 0.0;
  double error = 0.0;
  double ratio = std::numeric_limits<double>::quiet_NaN();
  double order = std::numeric_limits<double>::quiet_NaN();
  double c = 0.0;
  double c_error = std::numeric_limits<double>::quiet_NaN();
};

struct LevelResult {
  double h = 0.0;
  std::size_t nodes = 0;
  std::size_t interior = 0;
  std::size_t boundary = 0;
  std::size_t directions = 0;
  RealizedMetrics metrics;
  EigenSolution solution;
  Feasibility feasibility;
  double error = std::numeric_limits<double>::quiet_NaN();
  /// max over interior nodes of the target's signed distance at grad u^h.
  double containment = 0.0;
  double u_at_x0 = 0.0;
  double seconds = 0.0;
  std::shared_ptr<const QuadMesh> mesh;
};

struct ExperimentResult {
  std::vector<ConvergenceRow> rows;
  std::vector<LevelResult> levels;
  std::string failure;  // non-empty if the ladder stopped early
};

using ProgressFn = std::function<void(const std::string&)>;

/// Solves every ladder level; with out_dir, writes convergence.csv and
/// per-level solution files. A solver failure stops the ladder and is
/// reported in `failure` with the completed levels kept.
ExperimentResult run_experiment(const ExperimentSpec& spec, const std::optional<std::filesystem::path>& out_dir = {},
                                const ProgressFn& progress = {});

/// Solves one level and audits it. With `coarse`, its solution transferred
/// to the new mesh is the starting point.
LevelResult solve_level(const ExperimentSpec& spec, double h, const std::optional<std::filesystem::path>& out_prefix = {},
                        const LevelResult* coarse = nullptr);

/// Rows with ratio/order filled in from consecutive levels.
std::vector<ConvergenceRow> convergence_rows(const std::vector<LevelResult>& levels, double c_exact);

struct PoissonResult {
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  double c = 0.0;
  double error = 0.0;  // sup norm against the exact solution, constants matched at x = 0
};

/// -u'' + c f = 0 on (0,1), u' = g at x = 0, 1, u(0) = 0, with
/// f = scale cos(pi x/2), g = (2/pi) sin(pi x/2), on N uniform cells.
PoissonResult poisson_1d_demo(int N, double f_scale = 1.0);

struct GalleryRun {
  std::string name;
  LevelResult level;
  std::string failure;
};

/// Square (-1.1,1.1)^2 to bowl, cone, pentagon and disk; disk to the square.
std::vector<GalleryRun> run_shape_gallery(double h, const std::optional<std::filesystem::path>& out_dir = {},
                                          const ProgressFn& progress = {});

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::filesystem::path& path);
std::vector<ConvergenceRow> read_convergence_csv(const std::filesystem::path& path);

}  // namespace mlg
