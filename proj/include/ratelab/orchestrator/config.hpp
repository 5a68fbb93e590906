#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ratelab/ppo/update.hpp"
#include "ratelab/reward_model/reward_predictor.hpp"

namespace ratelab::orchestrator {

enum class Variant { ppo_env, rbrl, ours_full, ours_equal, ours_cls, ours_reg };

std::string_view to_string(Variant variant);
Variant parse_variant(std::string_view name);
/// Reward-model objective for the variant; nullopt for ppo_env.
std::optional<reward::LossVariant> loss_variant(Variant variant);

enum class RatingMode { synthetic, http };

std::string_view to_string(RatingMode mode);
RatingMode parse_rating_mode(std::string_view name);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string env = "point-mass";
  Variant variant = Variant::ours_full;
  int n_classes = 4;
  int n_ratings = 500;
  std::int64_t total_steps = 200000;
  int segment_length = 50;
  /// Phase-1 random policy repeats its previous action with this probability.
  double segment_action_hold = 0.95;
  double kappa = 30.0;
  double alpha = 0.5;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  RatingMode rating_mode = RatingMode::synthetic;
  /// Interior edges for the synthetic rater; empty uses the per-env default.
  std::vector<double> synthetic_boundaries;
  double synthetic_top_fraction = 0.8;

  /// Hidden widths of the policy, value and reward networks.
  std::vector<int> hidden_layers{256, 256, 256};
  ppo::PpoConfig ppo;
  double initial_log_std = -0.5;

  int reward_max_epochs = 200;
  int reward_batch_size = 32;
  double reward_learning_rate = 1e-3;
  double uncertainty_learning_rate = 1e-3;
  int reward_patience = 10;
  double reward_min_improvement = 1e-4;
  /// Off by default: the point-mass loss sits on a plateau for dozens of
  /// epochs before it starts to fall.
  bool reward_early_stopping = false;
  /// PPO steps between on-policy rating top-ups (synthetic mode only);
  /// 0 keeps the reward model frozen after phase 1.
  std::int64_t reward_retrain_interval = 0;
  int reward_retrain_ratings = 100;
  double log_lambda_limit = 4.0;

  std::int64_t eval_interval = 5000;
  int eval_episodes = 10;

  std::string http_host = "127.0.0.1";
  int http_port = 8080;
  /// Seconds to wait for human ratings before pausing the run.
  double http_timeout = 3600.0;
  double lease_seconds = 120.0;

  /// Run artifacts (ratings, checkpoints); empty disables them.
  std::filesystem::path output_dir;
};

/// Throws ConfigError on an inconsistent config.
void validate(const ExperimentConfig& config);

/// Raw `key = value` pairs in file order.
using ConfigEntries = std::map<std::string, std::string>;

/// Parses the key-value text format: one `key = value` per line, `#`
/// comments, list values comma-separated. Unknown or repeated keys are
/// errors naming the line.
ConfigEntries parse_config_entries(std::string_view text);
ConfigEntries read_config_entries(const std::filesystem::path& path);

/// Every settable key.
const std::vector<std::string>& config_keys();

/// Applies entries over the defaults. `env`, `variant` and `n_classes` may
/// be lists; their cartesian product gives one config each. ppo_env
/// configs that differ only in rating fields collapse to one.
std::vector<ExperimentConfig> expand_configs(const ConfigEntries& entries);

/// Single config; throws ConfigError if the entries expand to more.
ExperimentConfig make_config(const ConfigEntries& entries);

/// `key = value` lines in config_keys() order. Parsing the dump gives back
/// an equal config.
std::string dump_config(const ExperimentConfig& config);

/// 16 hex digits (FNV-1a 64) over the canonical dump without seeds,
/// output_dir and the http endpoint; ppo_env also drops the rating fields.
std::string config_hash(const ExperimentConfig& config);

}  // namespace ratelab::orchestrator
