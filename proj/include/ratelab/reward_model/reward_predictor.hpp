#pragma once

#include <Eigen/Dense>

#include <span>
#include <string_view>
#include <vector>

#include "ratelab/common/random.hpp"
#include "ratelab/nnet/dense_net.hpp"
#include "ratelab/segments/boundaries.hpp"
#include "ratelab/segments/segment.hpp"

namespace ratelab::reward {

/// Which objective trains the predictor.
///   full      uncertainty-weighted classification + regression
///   equal     0.5 * classification + 0.5 * regression
///   cls_only  uncertainty-weighted classification
///   reg_only  uncertainty-weighted regression
///   rbrl      plain classification cross-entropy (rating-based RL baseline)
enum class LossVariant { full, equal, cls_only, reg_only, rbrl };

std::string_view to_string(LossVariant variant);
LossVariant parse_loss_variant(std::string_view name);

bool uses_classification(LossVariant variant);
bool uses_regression(LossVariant variant);

struct RewardModelConfig {
  std::vector<int> hidden_layers{256, 256, 256};
  /// Sharpness of the rating-class softmax.
  double kappa = 30.0;
  /// Scale of the rating-to-return mapping log(1 + alpha * length * rating).
  double alpha = 0.5;
  LossVariant variant = LossVariant::full;
  /// log lambda is clamped to [-limit, limit] after every update.
  double log_lambda_limit = 4.0;
};

struct SegmentPrediction {
  std::vector<double> per_step_rewards;
  /// Predicted cumulative return (sum of per-step rewards).
  double R_hat = 0.0;
  /// R_hat / length, in (0, 1).
  double R_tilde = 0.0;
};

/// Per-step reward r(s, a) in (0, 1): a tanh MLP over concat(state, action)
/// with a sigmoid output, plus the two learnable log task-uncertainties
/// u_cls = log lambda_cls and u_reg = log lambda_reg.
template <typename T>
class RewardPredictor {
 public:
  using Net = nnet::BasicDenseNet<T>;
  using Matrix = typename Net::Matrix;

  /// Xavier-initialized network.
  RewardPredictor(int state_dim, int action_dim, RewardModelConfig config,
                  Rng& rng);
  /// Adopts `net`; its widths must start at state_dim + action_dim, end at 1
  /// and use a sigmoid output.
  RewardPredictor(int state_dim, int action_dim, Net net,
                  RewardModelConfig config);

  int state_dim() const noexcept { return state_dim_; }
  int action_dim() const noexcept { return action_dim_; }
  const RewardModelConfig& config() const noexcept { return config_; }
  LossVariant variant() const noexcept { return config_.variant; }
  double kappa() const noexcept { return config_.kappa; }
  double alpha() const noexcept { return config_.alpha; }

  Net& net() noexcept { return net_; }
  const Net& net() const noexcept { return net_; }

  double log_lambda_cls() const noexcept { return log_lambda_cls_; }
  double log_lambda_reg() const noexcept { return log_lambda_reg_; }
  /// Both setters clamp to the configured limit; non-finite values throw.
  void set_log_lambda_cls(double value);
  void set_log_lambda_reg(double value);

  /// Boundaries in force when the predictor was frozen.
  const segments::RatingBoundaries& boundaries() const noexcept {
    return boundaries_;
  }
  void set_boundaries(segments::RatingBoundaries boundaries);

  double step_reward(const Eigen::VectorXd& state,
                     const Eigen::VectorXd& action) const;
  SegmentPrediction predict_segment(const segments::Segment& segment) const;

  /// Network input for a segment: one column per step, concat(state, action).
  Matrix segment_inputs(const segments::Segment& segment) const;

 private:
  void check_segment(const segments::Segment& segment) const;

  int state_dim_;
  int action_dim_;
  RewardModelConfig config_;
  Net net_;
  double log_lambda_cls_ = 0.0;
  double log_lambda_reg_ = 0.0;
  segments::RatingBoundaries boundaries_;
};

extern template class RewardPredictor<float>;
extern template class RewardPredictor<double>;

}  // namespace ratelab::reward
