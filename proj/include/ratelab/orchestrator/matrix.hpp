#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ratelab/orchestrator/experiment.hpp"

namespace ratelab::orchestrator {

struct SummaryRow {
  std::string env;
  std::string variant;
  /// 0 for ppo_env, which uses no ratings.
  int n_classes = 0;
  std::int64_t step = 0;
  double mean = 0.0;
  /// Sample standard deviation over seeds / sqrt(n_runs); 0 for one run.
  double standard_error = 0.0;
  int n_runs = 0;
};

struct MatrixResult {
  /// In (config, seed) order regardless of completion order.
  std::vector<RunRecord> runs;
  std::vector<SummaryRow> summary;
};

/// Runs every seed of every config on up to `parallelism` threads, each run
/// with its own environment, networks and random streams. A failing run is
/// recorded and the rest continue. Throws std::invalid_argument on an empty
/// config list.
MatrixResult run_matrix(const std::vector<ExperimentConfig>& configs, int parallelism,
                        const RunOptions& options = {});

/// Mean and standard error over the completed runs of each (env, variant,
/// n_classes) at each eval step. Failed or paused runs are left out.
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& runs);

int summary_classes(const ExperimentConfig& config);

/// Columns: env,variant,n_classes,step,mean,stderr,n_runs
void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::filesystem::path& path);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

/// One line per eval point of every run. Columns:
/// env,variant,n_classes,seed,config_hash,step,mean_return,failed
void write_raw_csv(const std::vector<RunRecord>& runs, const std::filesystem::path& path);

struct RawRow {
  std::string env;
  std::string variant;
  int n_classes = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  /// False for a run that produced no eval point (step and mean are blank).
  bool has_point = false;
  std::int64_t step = 0;
  double mean_return = 0.0;
  bool failed = false;
};
std::vector<RawRow> read_raw_csv(const std::filesystem::path& path);

/// One line per run. Columns:
/// env,variant,n_classes,seed,config_hash,wall_clock_seconds,status
/// with status one of ok, failed, paused.
void write_runs_csv(const std::vector<RunRecord>& runs, const std::filesystem::path& path);

struct RunRow {
  std::string env;
  std::string variant;
  int n_classes = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  double wall_clock_seconds = 0.0;
  std::string status;
};
std::vector<RunRow> read_runs_csv(const std::filesystem::path& path);

}  // namespace ratelab::orchestrator
