#include "ratelab/orchestrator/matrix.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "ratelab/common/errors.hpp"

namespace ratelab::orchestrator {

int summary_classes(const ExperimentConfig& config) {
  return config.variant == Variant::ppo_env ? 0 : config.n_classes;
}

MatrixResult run_matrix(const std::vector<ExperimentConfig>& configs, int parallelism,
                        const RunOptions& options) {
  if (configs.empty()) throw std::invalid_argument("run_matrix needs at least one config");
  struct Job {
    const ExperimentConfig* config;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& c : configs) {
    validate(c);
    for (auto s : c.seeds) jobs.push_back({&c, s});
  }

  MatrixResult result;
  result.runs.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      try {
        result.runs[i] = run_experiment(*job.config, job.seed, options);
      } catch (const std::exception& e) {
        RunRecord failed;
        failed.config_hash = config_hash(*job.config);
        failed.config = *job.config;
        failed.seed = job.seed;
        failed.failed = true;
        failed.diagnostic = e.what();
        result.runs[i] = std::move(failed);
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, parallelism));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, jobs.size()); ++t) pool.emplace_back(worker);
  }
  result.summary = summarize(result.runs);
  return result;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& runs) {
  using Key = std::tuple<std::string, std::string, int, std::int64_t>;
  std::map<Key, std::vector<double>> groups;
  // Keep first-seen order of (env, variant, classes) for stable output.
  std::vector<std::tuple<std::string, std::string, int>> order;
  for (const auto& r : runs) {
    if (r.failed || r.paused) continue;
    const std::tuple<std::string, std::string, int> id{
        r.config.env, std::string(to_string(r.config.variant)), summary_classes(r.config)};
    if (std::find(order.begin(), order.end(), id) == order.end()) order.push_back(id);
    for (const auto& p : r.curve) {
      groups[{std::get<0>(id), std::get<1>(id), std::get<2>(id), p.step}].push_back(
          p.mean_return);
    }
  }
  std::vector<SummaryRow> rows;
  for (const auto& id : order) {
    for (const auto& [key, values] : groups) {
      if (std::get<0>(key) != std::get<0>(id) || std::get<1>(key) != std::get<1>(id) ||
          std::get<2>(key) != std::get<2>(id)) {
        continue;
      }
      SummaryRow row{std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key)};
      const double n = static_cast<double>(values.size());
      for (double v : values) row.mean += v / n;
      if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - row.mean) * (v - row.mean);
        row.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
      }
      row.n_runs = static_cast<int>(values.size());
      rows.push_back(row);
    }
  }
  return rows;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// Calls parse(cells, line_number) for every non-empty data row after
// checking the header and the column count.
template <typename Parse>
void read_csv(const std::filesystem::path& path, const std::string& header, Parse parse) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw FormatError(path.string() + ": unexpected header");
  }
  const auto columns = split_csv(header).size();
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    const auto where = path.string() + ":" + std::to_string(number) + ": ";
    if (cells.size() != columns) {
      throw FormatError(where + "expected " + std::to_string(columns) + " columns");
    }
    try {
      parse(cells);
    } catch (const std::logic_error&) {
      throw FormatError(where + "bad number");
    }
  }
}

const char* run_status(const RunRecord& r) {
  return r.failed ? "failed" : r.paused ? "paused" : "ok";
}

}  // namespace

void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "env,variant,n_classes,step,mean,stderr,n_runs\n";
  for (const auto& r : rows) {
    out << r.env << ',' << r.variant << ',' << r.n_classes << ',' << r.step << ','
        << fmt(r.mean) << ',' << fmt(r.standard_error) << ',' << r.n_runs << '\n';
  }
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "env,variant,n_classes,step,mean,stderr,n_runs") {
    throw FormatError(path.string() + ": unexpected summary header");
  }
  std::vector<SummaryRow> rows;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 7) {
      throw FormatError(path.string() + ":" + std::to_string(number) + ": expected 7 columns");
    }
    try {
      rows.push_back({cells[0], cells[1], std::stoi(cells[2]), std::stoll(cells[3]),
                      std::stod(cells[4]), std::stod(cells[5]), std::stoi(cells[6])});
    } catch (const std::logic_error&) {
      throw FormatError(path.string() + ":" + std::to_string(number) + ": bad number");
    }
  }
  return rows;
}

void write_raw_csv(const std::vector<RunRecord>& runs, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "env,variant,n_classes,seed,config_hash,step,mean_return,failed\n";
  for (const auto& r : runs) {
    const auto prefix = r.config.env + ',' + std::string(to_string(r.config.variant)) + ',' +
                        std::to_string(summary_classes(r.config)) + ',' +
                        std::to_string(r.seed) + ',' + r.config_hash + ',';
    const int failed = r.failed || r.paused ? 1 : 0;
    if (r.curve.empty()) {
      out << prefix << ",," << failed << '\n';
      continue;
    }
    for (const auto& p : r.curve) {
      out << prefix << p.step << ',' << fmt(p.mean_return) << ',' << failed << '\n';
    }
  }
}

std::vector<RawRow> read_raw_csv(const std::filesystem::path& path) {
  std::vector<RawRow> rows;
  read_csv(path, "env,variant,n_classes,seed,config_hash,step,mean_return,failed",
           [&](const std::vector<std::string>& c) {
             RawRow r;
             r.env = c[0];
             r.variant = c[1];
             r.n_classes = std::stoi(c[2]);
             r.seed = std::stoull(c[3]);
             r.config_hash = c[4];
             r.has_point = !c[5].empty();
             if (r.has_point) {
               r.step = std::stoll(c[5]);
               r.mean_return = std::stod(c[6]);
             }
             r.failed = c[7] == "1";
             rows.push_back(std::move(r));
           });
  return rows;
}

void write_runs_csv(const std::vector<RunRecord>& runs, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "env,variant,n_classes,seed,config_hash,wall_clock_seconds,status\n";
  for (const auto& r : runs) {
    out << r.config.env << ',' << to_string(r.config.variant) << ','
        << summary_classes(r.config) << ',' << r.seed << ',' << r.config_hash << ','
        << fmt(r.wall_clock_seconds) << ',' << run_status(r) << '\n';
  }
}

std::vector<RunRow> read_runs_csv(const std::filesystem::path& path) {
  std::vector<RunRow> rows;
  read_csv(path, "env,variant,n_classes,seed,config_hash,wall_clock_seconds,status",
           [&](const std::vector<std::string>& c) {
             rows.push_back({c[0], c[1], std::stoi(c[2]), std::stoull(c[3]), c[4],
                             std::stod(c[5]), c[6]});
           });
  return rows;
}

}  // namespace ratelab::orchestrator
