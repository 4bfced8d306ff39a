#include <fstream>
#include <sstream>

#include <json.hpp>

#include "minlag/experiments.hpp"

namespace mlg {

using nlohmann::json;

ExactKind exact_kind_from_string(const std::string& s) {
  if (s == "none") return ExactKind::None;
  if (s == "affine") return ExactKind::Affine;
  if (s == "quadratic-x") return ExactKind::QuadraticX;
  if (s == "poisson-1d") return ExactKind::Poisson1D;
  throw std::invalid_argument("unknown exact_kind '" + s + "' (none|affine|quadratic-x|poisson-1d)");
}

const char* to_string(ExactKind k) {
  switch (k) {
    case ExactKind::None: return "none";
    case ExactKind::Affine: return "affine";
    case ExactKind::QuadraticX: return "quadratic-x";
    case ExactKind::Poisson1D: return "poisson-1d";
  }
  return "none";
}

namespace {

Point2 point_of(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument(std::string(what) + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Matrix2 matrix_of(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument("matrix: expected 4 entries, row-major");
  Matrix2 m;
  m << j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>();
  return m;
}

ConvexBodyd shape_of(const json& j, std::optional<Matrix2>* matrix) {
  if (!j.is_object() || !j.contains("kind")) throw std::invalid_argument("shape: object with \"kind\" required");
  const auto kind = j.at("kind").get<std::string>();
  const Point2 center = j.contains("center") ? point_of(j.at("center"), "center") : Point2::Zero();
  if (kind == "disk") return ConvexBodyd::disk(center, j.at("radius").get<double>());
  if (kind == "ellipse") {
    const Matrix2 m = matrix_of(j.at("matrix"));
    if (matrix) *matrix = m;
    return ConvexBodyd::ellipse(m, center);
  }
  if (kind == "square") return ConvexBodyd::square(center, j.at("half_width").get<double>());
  if (kind == "polygon") {
    const auto& v = j.at("vertices");
    if (!v.is_array() || v.size() % 2 != 0) throw std::invalid_argument("polygon: vertices must be a flat x,y list");
    std::vector<Point2> pts;
    for (std::size_t i = 0; i < v.size(); i += 2) pts.emplace_back(v[i].get<double>(), v[i + 1].get<double>());
    return ConvexBodyd::polygon(std::move(pts));
  }
  if (kind == "segment") return ConvexBodyd::segment(point_of(j.at("a"), "a"), point_of(j.at("b"), "b"));
  if (kind == "bowl") return shapes::bowl();
  if (kind == "cone") return shapes::ice_cream_cone();
  if (kind == "pentagon") return shapes::pentagon();
  throw std::invalid_argument("shape: unknown kind '" + kind + "'");
}

}  // namespace

ConvexBodyd parse_shape(const std::string& json_text) { return shape_of(json::parse(json_text), nullptr); }

void ExperimentSpec::validate() const {
  if (ladder.empty()) throw std::invalid_argument("experiment: ladder is empty");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0)) throw std::invalid_argument("experiment: ladder entries must be positive");
    if (i > 0 && !(ladder[i] < ladder[i - 1])) throw std::invalid_argument("experiment: ladder must be strictly decreasing");
  }
  if (exact == ExactKind::Affine && (!domain_matrix || !target_matrix))
    throw std::invalid_argument("experiment: affine exact solution needs ellipse domain and target");
  if (exact == ExactKind::Poisson1D) throw std::invalid_argument("experiment: use the poisson1d command for the 1-D demo");
  solver.validate();
}

ExperimentSpec parse_experiment(const std::string& json_text) {
  const json j = json::parse(json_text);
  ExperimentSpec spec;
  spec.name = j.value("name", spec.name);
  spec.domain = shape_of(j.at("domain"), &spec.domain_matrix);
  spec.target = shape_of(j.at("target"), &spec.target_matrix);
  spec.ladder = j.at("ladder").get<std::vector<double>>();
  if (j.contains("mesh")) {
    const auto& m = j.at("mesh");
    spec.c_theta = m.value("c_theta", spec.c_theta);
    spec.c_r = m.value("c_r", spec.c_r);
    spec.delta_factor = m.value("delta_factor", spec.delta_factor);
    spec.hB_exponent = m.value("hB_exponent", spec.hB_exponent);
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    spec.solver.tol = s.value("tol", spec.solver.tol);
    spec.solver.max_iterations = s.value("max_iter", spec.solver.max_iterations);
    spec.solver.kappa_mode = kappa_mode_from_string(s.value("kappa_mode", std::string("auto")));
    spec.solver.linear_solver = linear_solver_from_string(s.value("linear_solver", std::string("auto")));
    spec.solver.nonmonotone_window = s.value("nonmonotone_window", spec.solver.nonmonotone_window);
    spec.solver.backtrack = s.value("backtrack", spec.solver.backtrack);
    spec.solver.min_step = s.value("min_step", spec.solver.min_step);
    spec.warm_start = s.value("warm_start", spec.warm_start);
  }
  if (j.contains("experiment")) spec.exact = exact_kind_from_string(j.at("experiment").value("exact_kind", "none"));
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment(ss.str());
}

ExperimentSpec affine_experiment() {
  ExperimentSpec spec;
  spec.name = "ellipse-to-ellipse";
  Matrix2 mx, my;
  mx << 2, 0, 0, 1;
  my << 1.5, 0.5, 0.5, 2;
  spec.domain = ConvexBodyd::ellipse(mx);
  spec.target = ConvexBodyd::ellipse(my);
  spec.domain_matrix = mx;
  spec.target_matrix = my;
  spec.ladder = {0.2625, 0.13125, 0.065625, 0.0328125, 0.01640625};
  spec.exact = ExactKind::Affine;
  return spec;
}

ExperimentSpec segment_experiment() {
  ExperimentSpec spec;
  spec.name = "disk-to-segment";
  spec.domain = ConvexBodyd::disk(Point2::Zero(), 1.0);
  spec.target = ConvexBodyd::segment(Point2(-1, 0), Point2(1, 0));
  spec.ladder = {0.1375, 0.06875, 0.034375, 0.0171875, 0.00859375};
  spec.exact = ExactKind::QuadraticX;
  return spec;
}

}  // namespace mlg
