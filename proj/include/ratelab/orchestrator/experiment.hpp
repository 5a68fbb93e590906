#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ratelab/orchestrator/config.hpp"
#include "ratelab/orchestrator/metrics.hpp"
#include "ratelab/reward_model/training.hpp"

namespace ratelab::orchestrator {

struct EvalPoint {
  std::int64_t step = 0;
  /// Mean ground-truth episode return of the deterministic policy.
  double mean_return = 0.0;
  double standard_error = 0.0;
};

struct RunRecord {
  std::string config_hash;
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::vector<EvalPoint> curve;
  /// Absent for ppo_env.
  std::optional<reward::RewardTrainingReport> reward_report;
  std::vector<std::size_t> rating_counts;
  double wall_clock_seconds = 0.0;
  bool failed = false;
  /// http mode ran out of time waiting for ratings; rerunning resumes from
  /// the ratings file.
  bool paused = false;
  std::string diagnostic;
  std::filesystem::path policy_checkpoint;
  std::filesystem::path reward_checkpoint;

  /// Last curve point, or 0 when there is none.
  double final_return() const noexcept {
    return curve.empty() ? 0.0 : curve.back().mean_return;
  }
};

struct RunOptions {
  /// Defaults to a null sink.
  MetricsSink* sink = nullptr;
  /// Called with the bound port once the rating server is up (http mode).
  std::function<void(int)> on_http_ready;
};

/// Directory for one run's artifacts: output_dir/<hash>-s<seed>.
std::filesystem::path run_directory(const ExperimentConfig& config, std::uint64_t seed);

/// Phase 1 (skipped for ppo_env): random-policy segments at random episode
/// offsets, rated synthetically or over HTTP, then reward-model training.
/// Phase 2: PPO on the learned reward (environment reward for ppo_env),
/// evaluated on ground-truth return at step 0, every eval_interval steps
/// and at total_steps. Training failures are reported in the record, not
/// thrown; an invalid config throws ConfigError.
RunRecord run_experiment(const ExperimentConfig& config, std::uint64_t seed,
                         const RunOptions& options = {});

}  // namespace ratelab::orchestrator
