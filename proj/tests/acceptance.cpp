// Acceptance suite: prints one PASS/FAIL line per criterion, exit code 1 if any fails.
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "minlag/experiments.hpp"
#include "property_checks.hpp"

using namespace mlg;

namespace {

int failures = 0;

void verdict(int id, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void note(const std::string& line) {
  std::printf("  %s\n", line.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Within a factor 3 either way, and mean order over consecutive levels.
bool ladder_matches(const ExperimentResult& res, const std::vector<double>& ref, double& mean_order, std::string& why) {
  if (!res.failure.empty()) {
    why = "ladder stopped: " + res.failure;
    return false;
  }
  if (res.rows.size() != ref.size()) {
    why = "expected " + std::to_string(ref.size()) + " levels";
    return false;
  }
  bool ok = true;
  double sum = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double e = res.rows[i].error;
    const bool in = e <= 3 * ref[i] && e >= ref[i] / 3;
    ok = ok && in;
    note(fmt("h=%-11.8g error=%.4e reference=%.4e factor=%.2f", res.rows[i].h, e, ref[i], e / ref[i]) +
         (i > 0 ? fmt(" order=%.3f", res.rows[i].order) : "") + (in ? "" : "  <-- outside factor 3"));
    if (i > 0) sum += res.rows[i].order;
  }
  mean_order = sum / static_cast<double>(ref.size() - 1);
  if (!(mean_order >= 0.8)) ok = false;
  why = fmt("mean order %.3f", mean_order);
  return ok;
}

// Nonincreasing with at most one inversion.
bool nonincreasing_one_inversion(const std::vector<double>& v, int& inversions) {
  inversions = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1]) ++inversions;
  return inversions <= 1;
}

bool same_bits(const EigenSolution& a, const EigenSolution& b) {
  return a.c == b.c && a.u.size() == b.u.size() && (a.u.array() == b.u.array()).all();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minlag acceptance suite"};
  std::string config_dir = MINLAG_CONFIG_DIR;
  std::vector<int> only;
  int trials = 1000;
  app.add_option("--configs", config_dir, "Directory holding affine.json and segment.json");
  app.add_option("--only", only, "Run just these criteria");
  app.add_option("--trials", trials, "Bump trials per operator (criterion 5)");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> pick(only.begin(), only.end());
  auto want = [&](int id) { return pick.empty() || pick.count(id) > 0; };
  const auto t_start = std::chrono::steady_clock::now();

  // every converged solution is audited for criterion 9
  std::vector<std::pair<std::string, const LevelResult*>> audited;

  ExperimentResult affine, segment;
  const bool need_affine = want(1) || want(3) || want(9);
  const bool need_segment = want(2) || want(3) || want(9);
  ExperimentSpec affine_spec, segment_spec;
  if (need_affine || need_segment) {
    affine_spec = load_experiment(config_dir + "/affine.json");
    segment_spec = load_experiment(config_dir + "/segment.json");
  }
  auto progress = [](const std::string& s) { note(s); };
  if (need_affine) {
    note("affine ladder (" + affine_spec.name + ")");
    affine = run_experiment(affine_spec, {}, progress);
    for (const auto& l : affine.levels) audited.emplace_back("affine h=" + fmt("%g", l.h), &l);
  }
  if (need_segment) {
    note("segment ladder (" + segment_spec.name + ")");
    segment = run_experiment(segment_spec, {}, progress);
    for (const auto& l : segment.levels) audited.emplace_back("segment h=" + fmt("%g", l.h), &l);
  }

  if (want(1)) {
    double order = 0;
    std::string why;
    const bool ok = ladder_matches(affine, {1.304e-1, 5.703e-2, 2.691e-2, 1.423e-2, 6.768e-3}, order, why);
    verdict(1, ok, "affine ladder errors within factor 3 of the reference table, " + why);
  }
  if (want(2)) {
    double order = 0;
    std::string why;
    const bool ok = ladder_matches(segment, {9.132e-2, 3.812e-2, 1.936e-2, 1.082e-2, 4.636e-3}, order, why);
    verdict(2, ok, "segment ladder errors within factor 3 of the reference table, " + why);
  }
  if (want(3)) {
    // The stated affine constant is checked as written; the exactly computed
    // eigenvalue of the same benchmark is checked alongside it.
    const double c_stated = 1.34605;
    const double c_exact = exact_affine_solution(*affine_spec.domain_matrix, *affine_spec.target_matrix).c;
    std::vector<double> d_stated, d_exact, d_seg;
    for (const auto& l : affine.levels) {
      d_stated.push_back(std::abs(l.solution.c - c_stated));
      d_exact.push_back(std::abs(l.solution.c - c_exact));
      note(fmt("affine  h=%-11.8g c=%.8f |c-1.34605|=%.4e |c-c_exact|=%.4e", l.h, l.solution.c, d_stated.back(),
               d_exact.back()));
    }
    for (const auto& l : segment.levels) {
      d_seg.push_back(std::abs(l.solution.c - std::numbers::pi / 4));
      note(fmt("segment h=%-11.8g c=%.8f |c-pi/4|=%.4e", l.h, l.solution.c, d_seg.back()));
    }
    int inv_stated = 0, inv_exact = 0, inv_seg = 0;
    bool ok = nonincreasing_one_inversion(d_stated, inv_stated);
    ok = nonincreasing_one_inversion(d_exact, inv_exact) && ok;
    ok = nonincreasing_one_inversion(d_seg, inv_seg) && ok;
    ok = ok && d_stated.size() == 5 && d_seg.size() == 5;
    verdict(3, ok,
            "eigenvalue error nonincreasing; inversions: affine vs 1.34605 " + std::to_string(inv_stated) +
                ", affine vs " + fmt("%.6f", c_exact) + " " + std::to_string(inv_exact) + ", segment vs pi/4 " +
                std::to_string(inv_seg));
  }

  if (want(4)) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> err;
    for (int N : {16, 32, 64, 128}) err.push_back(std::abs(poisson_1d_demo(N).c - 1));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = secs < 1.0;
    std::string orders;
    for (std::size_t i = 1; i < err.size(); ++i) {
      const double p = std::log2(err[i - 1] / err[i]);
      ok = ok && err[i] < err[i - 1] && std::abs(p - 1) <= 0.3;
      orders += fmt(" %.3f", p);
    }
    verdict(4, ok, "poisson |c-1| = " + fmt("%.3e", err.front()) + " .. " + fmt("%.3e", err.back()) + ", orders" + orders +
                       fmt(", %.3f s", secs));
  }

  if (want(5)) {
    struct Case {
      const char* name;
      checks::Problem pb;
    };
    Matrix2 mx, my;
    mx << 2, 0, 0, 1;
    my << 1.5, 0.5, 0.5, 2;
    const std::vector<Case> cases{
        {"disk to bowl", checks::Problem(ConvexBodyd::disk(Point2::Zero(), 1.0), shapes::bowl(), 0.1375)},
        {"ellipse to ellipse", checks::Problem(ConvexBodyd::ellipse(mx), ConvexBodyd::ellipse(my), 0.13125)},
        {"disk to segment", checks::Problem(ConvexBodyd::disk(Point2::Zero(), 1.0),
                                            ConvexBodyd::segment(Point2(-1, 0), Point2(1, 0)), 0.1375)}};
    bool ok = true;
    std::uint64_t seed = 101;
    for (const auto& c : cases) {
      const auto rep = checks::monotonicity_trials(c.pb, trials, seed++);
      std::string line = std::string(c.name) + ":";
      int total = 0;
      for (const auto& [op, v] : rep.violations) {
        line += " " + op + "=" + std::to_string(v);
        total += v;
        ok = ok && rep.trials.at(op) >= 2 * trials;
      }
      ok = ok && total == 0;
      note(line + fmt(" (worst relative change %.2e)", rep.worst));
    }
    verdict(5, ok, std::to_string(trials) + " bump trials per operator and problem, zero violations beyond 1e-12 required");
  }

  if (want(6)) {
    const auto disk = ConvexBodyd::disk(Point2::Zero(), 1.0);
    Matrix2 mx;
    mx << 2, 0, 0, 1;
    const auto ellipse = ConvexBodyd::ellipse(mx);
    const auto square = ConvexBodyd::square(Point2::Zero(), 1.1);
    std::array<double, 4> each{};
    double moment = 0, affine_err = 0;
    std::size_t n2 = 0, n1 = 0;
    std::uint64_t seed = 7;
    for (const auto& [dom, h] : std::vector<std::pair<ConvexBodyd, double>>{
             {disk, 0.034375}, {ellipse, 0.065625}, {square, 0.06875}, {shapes::pentagon(), 0.06875}}) {
      const QuadMesh mesh = build_mesh(dom, MeshParams::from_h(h));
      const StencilCache cache = StencilCache::build(mesh, dom);
      const auto a = checks::stencil_audit(mesh, cache, seed++);
      moment = std::max(moment, a.worst_moment);
      for (std::size_t k = 0; k < 4; ++k) each[k] = std::max(each[k], a.worst_each[k]);
      affine_err = std::max(affine_err, a.worst_affine);
      n2 += a.second;
      n1 += a.affine;
    }
    note(fmt("moment residuals: sum aC %.2e, sum aS %.2e, sum aCS %.2e, sum aC^2-2 %.2e", each[0], each[1], each[2], each[3]));
    verdict(6, moment <= 1e-10 && affine_err <= 1e-12,
            fmt("%.0f second-derivative stencils, worst moment residual %.2e; %.0f first-derivative/boundary stencils, "
                "worst affine error %.2e",
                static_cast<double>(n2), moment, static_cast<double>(n1), affine_err));
  }

  if (want(7)) {
    const checks::Problem pentagon(ConvexBodyd::disk(Point2::Zero(), 1.0), shapes::pentagon(), 0.1375);
    Matrix2 mx, my;
    mx << 2, 0, 0, 1;
    my << 1.5, 0.5, 0.5, 2;
    const checks::Problem ellipses(ConvexBodyd::ellipse(mx), ConvexBodyd::ellipse(my), 0.13125);
    bool ok = true;
    std::string line;
    std::uint64_t seed = 31;
    for (const auto* pb : {&pentagon, &ellipses}) {
      for (int scheme : {1, 2}) {
        const auto a = checks::jacobian_audit(*pb, scheme, 500, seed++);
        ok = ok && a.fraction() >= 0.95;
        line += fmt(" %.1f%%", 100 * a.fraction());
        note(fmt("scheme %.0f: %.0f/%.0f rows within 1e-5, %.0f kink samples redrawn", scheme, a.matched, a.sampled,
                 a.redrawn) +
             fmt(", worst %.2e", a.worst));
      }
    }
    verdict(7, ok, "generalized Jacobian rows matching finite differences:" + line);
  }

  std::vector<GalleryRun> gallery;
  const double gallery_h = 0.06875;
  if (want(8) || want(9)) {
    note(fmt("shape gallery at h=%g", gallery_h));
    gallery = run_shape_gallery(gallery_h, {}, progress);
    for (const auto& g : gallery)
      if (g.failure.empty()) audited.emplace_back(g.name, &g.level);
  }
  if (want(8)) {
    bool ok = gallery.size() == 5;
    double worst = -1e300;
    for (const auto& g : gallery) {
      ok = ok && g.failure.empty() && g.level.containment <= 2 * gallery_h;
      if (g.failure.empty()) worst = std::max(worst, g.level.containment);
    }
    verdict(8, ok, fmt("max signed distance of interior gradients to the target %.4e, bound 2h = %.4e", worst, 2 * gallery_h));
  }

  if (want(9)) {
    bool ok = !audited.empty();
    double excess = -1e300;
    for (const auto& [name, l] : audited) {
      const bool good = l->feasibility.ok && l->u_at_x0 == 0.0;
      if (!good) note(name + fmt(": E-R=%.3e u(x0)=%.3e", l->feasibility.max_excess, l->u_at_x0));
      ok = ok && good;
      excess = std::max(excess, l->feasibility.max_excess);
    }
    // reruns of identical configurations
    int reruns = 0;
    bool identical = true;
    for (const auto* pair : {&affine, &segment}) {
      if (pair->levels.size() < 3) continue;
      ExperimentSpec spec = pair == &affine ? affine_spec : segment_spec;
      spec.ladder.resize(3);
      const auto again = run_experiment(spec);
      for (std::size_t i = 0; i < 3 && i < again.levels.size(); ++i, ++reruns)
        identical = identical && same_bits(again.levels[i].solution, pair->levels[i].solution);
      identical = identical && again.levels.size() == 3;
    }
    if (!gallery.empty() && gallery.front().failure.empty()) {
      ExperimentSpec spec;
      spec.domain = ConvexBodyd::square(Point2::Zero(), 1.1);
      spec.target = shapes::bowl();
      spec.ladder = {gallery_h};
      const auto again = solve_level(spec, gallery_h);
      identical = identical && same_bits(again.solution, gallery.front().level.solution);
      ++reruns;
    }
    ok = ok && identical && reruns > 0;
    verdict(9, ok,
            std::to_string(audited.size()) + " solutions: max E-R " + fmt("%.3e", excess) + ", u(x0) = 0; " +
                std::to_string(reruns) + " reruns " + (identical ? "bit-identical" : "DIFFER"));
  }

  note(fmt("total %.1f s", std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count()));
  return failures == 0 ? 0 : 1;
}
