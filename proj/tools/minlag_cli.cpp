// minlag: command line driver for the Lagrangian graph solver.
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "minlag/experiments.hpp"

namespace {

void print_level(const mlg::LevelResult& l) {
  std::printf("h=%.6g realized_h=%.4g nodes=%zu (interior %zu, boundary %zu) directions=%zu\n", l.h, l.metrics.h,
              l.nodes, l.interior, l.boundary, l.directions);
  std::printf("c=%.10f iterations=%d residual=%.3e step2=%s kappa=%.3g\n", l.solution.c, l.solution.iterations,
              l.solution.residual, l.solution.step2_used ? "yes" : "no", l.solution.kappa_used);
  if (!std::isnan(l.error)) std::printf("error=%.6e\n", l.error);
  std::printf("containment=%.3e eikonal_excess=%.3e time=%.2fs\n", l.containment, l.feasibility.max_excess, l.seconds);
}

auto progress = [](const std::string& line) { std::cerr << line << '\n'; };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian graph solver for the additive eigenvalue problem"};
  app.require_subcommand(1);

  std::string config;
  std::string out;

  auto* solve = app.add_subcommand("solve", "Solve the first ladder level of a config");
  solve->add_option("--config", config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--out", out, "Output directory");

  auto* conv = app.add_subcommand("convergence", "Run the full ladder of a config");
  conv->add_option("--config", config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  conv->add_option("--out", out, "Output directory");

  int n = 64;
  double scale = 1.0;
  auto* poisson = app.add_subcommand("poisson1d", "1-D Neumann Poisson eigenvalue demo");
  poisson->add_option("--n", n, "Number of cells")->check(CLI::PositiveNumber);
  poisson->add_option("--scale", scale, "Scale of the source term");

  double gallery_h = 0.06875;
  auto* gallery = app.add_subcommand("gallery", "Square and disk shape gallery");
  gallery->add_option("--resolution", gallery_h, "Resolution")->check(CLI::PositiveNumber);
  gallery->add_option("--out", out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  std::optional<std::filesystem::path> out_dir;
  if (!out.empty()) out_dir = out;

  try {
    if (*solve) {
      const auto spec = mlg::load_experiment(config);
      if (out_dir) std::filesystem::create_directories(*out_dir);
      std::optional<std::filesystem::path> prefix;
      if (out_dir) prefix = *out_dir / spec.name;
      print_level(mlg::solve_level(spec, spec.ladder.front(), prefix));
    } else if (*conv) {
      const auto spec = mlg::load_experiment(config);
      const auto result = mlg::run_experiment(spec, out_dir, progress);
      std::printf("%-12s %-12s %-8s %-8s %-14s %-12s\n", "h", "error", "ratio", "order", "c", "|c-c*|");
      for (const auto& r : result.rows)
        std::printf("%-12.6g %-12.4e %-8.3f %-8.3f %-14.8f %-12.4e\n", r.h, r.error, r.ratio, r.order, r.c, r.c_error);
      if (!result.failure.empty()) {
        std::cerr << "ladder stopped: " << result.failure << '\n';
        return 2;
      }
    } else if (*poisson) {
      const auto r = mlg::poisson_1d_demo(n, scale);
      std::printf("N=%d c=%.12f |c-1|=%.6e error=%.6e\n", n, r.c, std::abs(r.c - 1.0), r.error);
    } else if (*gallery) {
      int failed = 0;
      for (const auto& run : mlg::run_shape_gallery(gallery_h, out_dir, progress))
        if (!run.failure.empty()) ++failed;
      if (failed) return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
