#include "ratelab/reward_model/reward_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ratelab/common/errors.hpp"

namespace ratelab::reward {

std::string_view to_string(LossVariant variant) {
  switch (variant) {
    case LossVariant::full:
      return "full";
    case LossVariant::equal:
      return "equal";
    case LossVariant::cls_only:
      return "cls_only";
    case LossVariant::reg_only:
      return "reg_only";
    case LossVariant::rbrl:
      return "rbrl";
  }
  return "full";
}

LossVariant parse_loss_variant(std::string_view name) {
  if (name == "full") return LossVariant::full;
  if (name == "equal") return LossVariant::equal;
  if (name == "cls_only") return LossVariant::cls_only;
  if (name == "reg_only") return LossVariant::reg_only;
  if (name == "rbrl") return LossVariant::rbrl;
  throw std::invalid_argument("unknown loss variant '" + std::string(name) + "'");
}

bool uses_classification(LossVariant variant) {
  return variant != LossVariant::reg_only;
}

bool uses_regression(LossVariant variant) {
  return variant == LossVariant::full || variant == LossVariant::equal ||
         variant == LossVariant::reg_only;
}

namespace {

std::vector<int> reward_widths(int state_dim, int action_dim,
                               const std::vector<int>& hidden) {
  std::vector<int> widths{state_dim + action_dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  return widths;
}

}  // namespace

template <typename T>
RewardPredictor<T>::RewardPredictor(int state_dim, int action_dim,
                                    RewardModelConfig config, Rng& rng)
    : RewardPredictor(state_dim, action_dim,
                      Net::xavier(reward_widths(state_dim, action_dim,
                                                config.hidden_layers),
                                  nnet::Activation::sigmoid, rng),
                      config) {}

template <typename T>
RewardPredictor<T>::RewardPredictor(int state_dim, int action_dim, Net net,
                                    RewardModelConfig config)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      config_(std::move(config)),
      net_(std::move(net)),
      boundaries_(segments::uniform_boundaries(2)) {
  if (net_.input_size() != state_dim + action_dim) {
    throw DimensionError("reward net input",
                         static_cast<std::size_t>(state_dim + action_dim),
                         static_cast<std::size_t>(net_.input_size()));
  }
  if (net_.output_size() != 1 ||
      net_.output_activation() != nnet::Activation::sigmoid) {
    throw std::invalid_argument("reward net must end in one sigmoid unit");
  }
  if (!(config_.kappa > 0.0) || !(config_.alpha > 0.0) ||
      !(config_.log_lambda_limit > 0.0)) {
    throw std::invalid_argument("kappa, alpha and the log-lambda limit must be positive");
  }
}

template <typename T>
void RewardPredictor<T>::set_log_lambda_cls(double value) {
  if (!std::isfinite(value)) throw NonFiniteError("log lambda_cls not finite");
  log_lambda_cls_ =
      std::clamp(value, -config_.log_lambda_limit, config_.log_lambda_limit);
}

template <typename T>
void RewardPredictor<T>::set_log_lambda_reg(double value) {
  if (!std::isfinite(value)) throw NonFiniteError("log lambda_reg not finite");
  log_lambda_reg_ =
      std::clamp(value, -config_.log_lambda_limit, config_.log_lambda_limit);
}

template <typename T>
void RewardPredictor<T>::set_boundaries(segments::RatingBoundaries boundaries) {
  segments::validate(boundaries);
  boundaries_ = std::move(boundaries);
}

template <typename T>
void RewardPredictor<T>::check_segment(const segments::Segment& segment) const {
  if (segment.states.cols() != state_dim_) {
    throw DimensionError("segment state width", static_cast<std::size_t>(state_dim_),
                         static_cast<std::size_t>(segment.states.cols()));
  }
  if (segment.actions.cols() != action_dim_) {
    throw DimensionError("segment action width",
                         static_cast<std::size_t>(action_dim_),
                         static_cast<std::size_t>(segment.actions.cols()));
  }
  if (segment.actions.rows() != segment.states.rows() ||
      segment.states.rows() == 0) {
    throw std::invalid_argument("segment states and actions disagree in length");
  }
}

template <typename T>
typename RewardPredictor<T>::Matrix RewardPredictor<T>::segment_inputs(
    const segments::Segment& segment) const {
  check_segment(segment);
  Matrix inputs(state_dim_ + action_dim_, segment.length());
  inputs.topRows(state_dim_) = segment.states.transpose().template cast<T>();
  inputs.bottomRows(action_dim_) = segment.actions.transpose().template cast<T>();
  return inputs;
}

template <typename T>
double RewardPredictor<T>::step_reward(const Eigen::VectorXd& state,
                                       const Eigen::VectorXd& action) const {
  if (state.size() != state_dim_) {
    throw DimensionError("reward state", static_cast<std::size_t>(state_dim_),
                         static_cast<std::size_t>(state.size()));
  }
  if (action.size() != action_dim_) {
    throw DimensionError("reward action", static_cast<std::size_t>(action_dim_),
                         static_cast<std::size_t>(action.size()));
  }
  typename Net::Vector input(state_dim_ + action_dim_);
  input.head(state_dim_) = state.template cast<T>();
  input.tail(action_dim_) = action.template cast<T>();
  return static_cast<double>(net_.forward(input)(0));
}

template <typename T>
SegmentPrediction RewardPredictor<T>::predict_segment(
    const segments::Segment& segment) const {
  const Matrix out = net_.forward_batch(segment_inputs(segment));
  SegmentPrediction pred;
  pred.per_step_rewards.reserve(static_cast<std::size_t>(out.cols()));
  for (Eigen::Index t = 0; t < out.cols(); ++t) {
    const double r = static_cast<double>(out(0, t));
    pred.per_step_rewards.push_back(r);
    pred.R_hat += r;
  }
  pred.R_tilde = pred.R_hat / static_cast<double>(segment.length());
  return pred;
}

template class RewardPredictor<float>;
template class RewardPredictor<double>;

}  // namespace ratelab::reward
