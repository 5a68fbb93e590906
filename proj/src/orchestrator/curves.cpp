#include "ratelab/orchestrator/curves.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ratelab/common/errors.hpp"

namespace ratelab::orchestrator {

namespace {

constexpr const char* kHeader = "step,variant,n_classes,mean,stderr";
constexpr std::string_view kPrefix = "curves_";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<std::filesystem::path> emit_curves(const std::vector<SummaryRow>& summary,
                                               const std::filesystem::path& out_dir) {
  std::vector<std::string> envs;
  for (const auto& r : summary) {
    if (std::find(envs.begin(), envs.end(), r.env) == envs.end()) envs.push_back(r.env);
  }
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> paths;
  for (const auto& env : envs) {
    const auto path = out_dir / (std::string(kPrefix) + env + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << kHeader << '\n';
    for (const auto& r : summary) {
      if (r.env != env) continue;
      out << r.step << ',' << r.variant << ',' << r.n_classes << ',' << fmt(r.mean) << ','
          << fmt(r.standard_error) << '\n';
    }
    paths.push_back(path);
  }
  return paths;
}

std::vector<SummaryRow> read_curves_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string env = path.stem().string();
  if (env.rfind(kPrefix, 0) == 0) env.erase(0, kPrefix.size());
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw FormatError(path.string() + ": unexpected curves header");
  }
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw FormatError(path.string() + ": expected 5 columns");
    SummaryRow r;
    r.env = env;
    r.step = std::stoll(cells[0]);
    r.variant = cells[1];
    r.n_classes = std::stoi(cells[2]);
    r.mean = std::stod(cells[3]);
    r.standard_error = std::stod(cells[4]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace ratelab::orchestrator
