#include "ratelab/nnet/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "ratelab/common/errors.hpp"

namespace ratelab::nnet {

std::string_view to_string(StepStatus status) {
  switch (status) {
    case StepStatus::applied:
      return "applied";
    case StepStatus::rejected_nonfinite_gradient:
      return "rejected: non-finite gradient";
    case StepStatus::rejected_nonfinite_result:
      return "rejected: update would produce non-finite parameters";
  }
  return "unknown";
}

template <typename T>
Adam<T>::Adam(Eigen::Index size, AdamConfig config)
    : config_(config), m_(Vector::Zero(size)), v_(Vector::Zero(size)) {
  if (config_.learning_rate < 0.0 || config_.beta1 < 0.0 ||
      config_.beta1 >= 1.0 || config_.beta2 < 0.0 || config_.beta2 >= 1.0 ||
      config_.epsilon <= 0.0) {
    throw std::invalid_argument("invalid Adam hyperparameters");
  }
}

template <typename T>
StepStatus Adam<T>::step(Eigen::Ref<Vector> params, const Vector& grad) {
  if (params.size() != m_.size()) {
    throw DimensionError("adam parameters", static_cast<std::size_t>(m_.size()),
                         static_cast<std::size_t>(params.size()));
  }
  if (grad.size() != m_.size()) {
    throw DimensionError("adam gradient", static_cast<std::size_t>(m_.size()),
                         static_cast<std::size_t>(grad.size()));
  }
  if (!grad.allFinite()) return StepStatus::rejected_nonfinite_gradient;

  const T b1 = static_cast<T>(config_.beta1);
  const T b2 = static_cast<T>(config_.beta2);
  const std::int64_t t = steps_ + 1;
  const double correction1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t));

  Vector m = b1 * m_ + (T(1) - b1) * grad;
  Vector v = b2 * v_ + (T(1) - b2) * grad.cwiseProduct(grad);
  const T step_size = static_cast<T>(config_.learning_rate / correction1);
  const T inv_c2 = static_cast<T>(1.0 / correction2);
  const T eps = static_cast<T>(config_.epsilon);
  Vector updated =
      params - (step_size * m.array() /
                ((v.array() * inv_c2).sqrt() + eps))
                   .matrix();
  if (!updated.allFinite()) return StepStatus::rejected_nonfinite_result;

  params = updated;
  m_ = std::move(m);
  v_ = std::move(v);
  steps_ = t;
  return StepStatus::applied;
}

template class Adam<float>;
template class Adam<double>;

}  // namespace ratelab::nnet
