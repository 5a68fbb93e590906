#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>

#include "ratelab/common/random.hpp"
#include "ratelab/nnet/adam.hpp"
#include "ratelab/ppo/policy.hpp"
#include "ratelab/ppo/rollout.hpp"

namespace ratelab::ppo {

struct PpoConfig {
  double clip = 0.4;
  double learning_rate = 5e-5;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  int rollout_length = 2048;
  int epochs = 10;
  int minibatch_size = 64;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  /// Global L2 norm over policy, log-std and value gradients.
  double max_grad_norm = 0.5;
};

struct PpoUpdateReport {
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double entropy = 0.0;
  /// Negated clipped surrogate, averaged over minibatches.
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double approx_kl = 0.0;
  int minibatches = 0;
  bool aborted = false;
  std::string diagnostic;
};

/// min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A)
double clipped_surrogate(double ratio, double advantage, double eps);

/// True when the clipped branch is the active one, i.e. the per-sample
/// objective has no gradient through the ratio.
bool surrogate_clipped(double ratio, double advantage, double eps);

struct SurrogateStats {
  double surrogate = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

/// Clipped surrogate of `policy` on the batch, with the given advantages
/// (no normalization applied here). Clip fraction counts |ratio - 1| > eps.
template <typename T>
SurrogateStats evaluate_surrogate(const GaussianPolicy<T>& policy,
                                  const RolloutBatch& batch,
                                  std::span<const double> advantages, double eps);

struct PolicyGradient {
  /// d(mean surrogate)/d(mean-net parameters).
  Eigen::VectorXd mean_net;
  Eigen::VectorXd log_std;
  SurrogateStats stats;
};

/// Ascent gradient of the mean clipped surrogate over the listed columns.
template <typename T>
PolicyGradient surrogate_gradient(GaussianPolicy<T>& policy,
                                  const RolloutBatch& batch,
                                  std::span<const std::size_t> columns,
                                  std::span<const double> advantages, double eps);

template <typename T>
class PpoOptimizer {
 public:
  PpoOptimizer(const GaussianPolicy<T>& policy, const ValueNet<T>& value,
               const PpoConfig& config);

  nnet::Adam<T>& policy() noexcept { return policy_; }
  nnet::Adam<double>& log_std() noexcept { return log_std_; }
  nnet::Adam<T>& value() noexcept { return value_; }

 private:
  nnet::Adam<T> policy_;
  nnet::Adam<double> log_std_;
  nnet::Adam<T> value_;
};

/// Clipped-surrogate PPO over a batch whose advantages are computed.
/// Advantages are normalized once per update; minibatches are reshuffled
/// every epoch from `rng`. A non-finite loss or gradient stops the update
/// with the report marked aborted; steps already applied are kept.
template <typename T>
PpoUpdateReport ppo_update(GaussianPolicy<T>& policy, ValueNet<T>& value,
                           PpoOptimizer<T>& optimizer, const RolloutBatch& batch,
                           const PpoConfig& config, Rng& rng);

extern template class PpoOptimizer<float>;
extern template class PpoOptimizer<double>;

}  // namespace ratelab::ppo
