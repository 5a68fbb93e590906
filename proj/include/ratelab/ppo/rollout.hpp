#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <vector>

#include "ratelab/common/random.hpp"
#include "ratelab/envs/environment.hpp"
#include "ratelab/ppo/policy.hpp"
#include "ratelab/reward_model/reward_predictor.hpp"

namespace ratelab::ppo {

/// Where the training reward comes from.
template <typename T>
class RewardSource {
 public:
  static RewardSource environment() { return RewardSource(nullptr); }
  /// The predictor must outlive the source.
  static RewardSource learned(const reward::RewardPredictor<T>& predictor) {
    return RewardSource(&predictor);
  }

  bool is_environment() const noexcept { return predictor_ == nullptr; }
  const reward::RewardPredictor<T>* predictor() const noexcept { return predictor_; }

  /// Reward per column of (states, actions); env_rewards pass through for
  /// the environment source.
  std::vector<double> rewards(const Eigen::MatrixXd& states,
                              const Eigen::MatrixXd& actions,
                              const std::vector<double>& env_rewards) const;

 private:
  explicit RewardSource(const reward::RewardPredictor<T>* p) : predictor_(p) {}
  const reward::RewardPredictor<T>* predictor_;
};

/// Column t of each matrix is transition t.
struct RolloutBatch {
  Eigen::MatrixXd states;
  /// Pre-squash Gaussian samples; log_probs refer to these.
  Eigen::MatrixXd raw_actions;
  /// Actions applied to the environment.
  Eigen::MatrixXd actions;
  std::vector<double> log_probs;
  /// Training reward from the selected source.
  std::vector<double> rewards;
  /// Ground-truth reward, kept for logging.
  std::vector<double> env_rewards;
  std::vector<double> values;
  std::vector<char> dones;
  /// V(s_{t+1}) for transitions cut by the horizon, else 0, so truncated
  /// episodes still bootstrap while done cuts the recursion.
  std::vector<double> truncation_values;
  /// V of the state following the last transition (0 if it ended an episode).
  double last_value = 0.0;

  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const noexcept { return log_probs.size(); }
  /// Throws DimensionError when any per-step field disagrees in length.
  void check_consistent() const;
};

/// Steps one persistent environment, carrying episodes across calls. An
/// environment handed over mid-episode continues from its current state.
template <typename T>
class RolloutCollector {
 public:
  RolloutCollector(std::unique_ptr<envs::Environment> env, std::uint64_t seed);

  /// Exactly `steps` transitions (steps >= 1).
  RolloutBatch collect(const GaussianPolicy<T>& policy, const ValueNet<T>& value,
                       const RewardSource<T>& reward, int steps);

  const envs::Environment& environment() const noexcept { return *env_; }
  std::int64_t total_steps() const noexcept { return total_steps_; }
  /// Ground-truth returns of episodes finished so far.
  const std::vector<double>& completed_returns() const noexcept {
    return completed_returns_;
  }

 private:
  void start_episode();

  std::unique_ptr<envs::Environment> env_;
  std::uint64_t seed_;
  Rng rng_;
  Eigen::VectorXd observation_;
  std::uint64_t episodes_ = 0;
  std::int64_t total_steps_ = 0;
  double episode_return_ = 0.0;
  std::vector<double> completed_returns_;
};

/// One-shot helper: fresh collector over `env`.
template <typename T>
RolloutBatch collect_rollout(const envs::Environment& env,
                             const GaussianPolicy<T>& policy,
                             const ValueNet<T>& value,
                             const RewardSource<T>& reward, int steps,
                             std::uint64_t seed);

extern template class RewardSource<float>;
extern template class RewardSource<double>;
extern template class RolloutCollector<float>;
extern template class RolloutCollector<double>;

}  // namespace ratelab::ppo
