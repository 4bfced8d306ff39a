#include <fstream>
#include <sstream>

#include "minlag/experiments.hpp"

namespace mlg {

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# schema: minlag-convergence v1\n";
  out << "h,error,ratio,order,c,c_error\n";
  out.precision(10);
  for (const auto& r : rows) {
    out << r.h << ',' << r.error << ',';
    if (!std::isnan(r.ratio)) out << r.ratio;
    out << ',';
    if (!std::isnan(r.order)) out << r.order;
    out << ',' << r.c << ',';
    if (!std::isnan(r.c_error)) out << r.c_error;
    out << '\n';
  }
}

std::vector<ConvergenceRow> read_convergence_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<ConvergenceRow> rows;
  std::string line;
  bool header = false;
  auto field = [](const std::string& s) {
    return s.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    while (cols.size() < 6) cols.emplace_back();
    ConvergenceRow r;
    r.h = field(cols[0]);
    r.error = field(cols[1]);
    r.ratio = field(cols[2]);
    r.order = field(cols[3]);
    r.c = field(cols[4]);
    r.c_error = field(cols[5]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace mlg
