#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <vector>

#include "json.hpp"
#include "ratelab/common/random.hpp"
#include "ratelab/envs/environment.hpp"
#include "ratelab/nnet/dense_net.hpp"

namespace ratelab::ppo {

struct PolicyConfig {
  std::vector<int> hidden_layers{256, 256, 256};
  double initial_log_std = -0.5;
  double log_std_min = -5.0;
  double log_std_max = 2.0;
  /// The mean head's last layer is scaled by this after Xavier init so the
  /// initial policy is centred.
  double output_layer_scale = 0.01;
};

struct ActionSample {
  /// Gaussian sample before squashing.
  Eigen::VectorXd raw;
  /// tanh(raw) mapped affinely onto the action bounds.
  Eigen::VectorXd action;
  double log_prob = 0.0;
};

/// Diagonal Gaussian over pre-squash actions; actions are tanh-squashed
/// into the environment bounds. log_prob() is the density of the squashed
/// unit action tanh(raw) (Gaussian term minus sum log(1 - tanh^2)); the
/// constant Jacobian of the final affine map to the bounds is left out.
template <typename T>
class GaussianPolicy {
 public:
  using Net = nnet::BasicDenseNet<T>;

  GaussianPolicy(const envs::EnvSpec& spec, const PolicyConfig& config, Rng& rng);
  GaussianPolicy(const envs::EnvSpec& spec, const PolicyConfig& config, Net mean_net,
                 Eigen::VectorXd log_std);

  int state_dim() const noexcept { return mean_net_.input_size(); }
  int action_dim() const noexcept { return mean_net_.output_size(); }
  const PolicyConfig& config() const noexcept { return config_; }

  Net& mean_net() noexcept { return mean_net_; }
  const Net& mean_net() const noexcept { return mean_net_; }
  const Eigen::VectorXd& log_std() const noexcept { return log_std_; }
  /// Clamps into [log_std_min, log_std_max].
  void set_log_std(const Eigen::VectorXd& values);

  const Eigen::VectorXd& action_low() const noexcept { return low_; }
  const Eigen::VectorXd& action_high() const noexcept { return high_; }

  Eigen::VectorXd mean(const Eigen::VectorXd& state) const;
  ActionSample sample(const Eigen::VectorXd& state, Rng& rng) const;
  /// Deterministic action: the squashed mean.
  Eigen::VectorXd mean_action(const Eigen::VectorXd& state) const;
  Eigen::VectorXd squash(const Eigen::VectorXd& raw) const;
  double log_prob(const Eigen::VectorXd& state, const Eigen::VectorXd& raw) const;
  /// Entropy of the pre-squash Gaussian.
  double entropy() const;

 private:
  PolicyConfig config_;
  Net mean_net_;
  Eigen::VectorXd log_std_;
  Eigen::VectorXd low_;
  Eigen::VectorXd high_;
};

/// Log density of raw under N(mean, diag(exp(log_std))^2), plus the tanh
/// squash correction. Shared by the policy and the update step.
double squashed_gaussian_log_prob(const Eigen::VectorXd& raw,
                                  const Eigen::VectorXd& mean,
                                  const Eigen::VectorXd& log_std);

/// log(1 - tanh(x)^2), stable for large |x|.
double log_tanh_slope(double x);

template <typename T>
class ValueNet {
 public:
  using Net = nnet::BasicDenseNet<T>;

  ValueNet(int state_dim, const std::vector<int>& hidden_layers, Rng& rng);
  explicit ValueNet(Net net);

  double value(const Eigen::VectorXd& state) const;
  Net& net() noexcept { return net_; }
  const Net& net() const noexcept { return net_; }

 private:
  Net net_;
};

template <typename T>
nlohmann::json to_json(const GaussianPolicy<T>& policy);
template <typename T>
GaussianPolicy<T> policy_from_json(const envs::EnvSpec& spec,
                                   const nlohmann::json& doc);

template <typename T>
void save_policy(const GaussianPolicy<T>& policy, const ValueNet<T>& value,
                 const std::filesystem::path& path);

extern template class GaussianPolicy<float>;
extern template class GaussianPolicy<double>;
extern template class ValueNet<float>;
extern template class ValueNet<double>;

}  // namespace ratelab::ppo
