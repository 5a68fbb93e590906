#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>

namespace ratelab::nnet {

struct AdamConfig {
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

enum class StepStatus {
  applied,
  rejected_nonfinite_gradient,
  rejected_nonfinite_result,
};

std::string_view to_string(StepStatus status);

/// Adam with bias correction over one flat parameter block.
///
/// A rejected step leaves parameters, moments and the step counter untouched.
template <typename T>
class Adam {
 public:
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  Adam(Eigen::Index size, AdamConfig config);

  StepStatus step(Eigen::Ref<Vector> params, const Vector& grad);

  const AdamConfig& config() const noexcept { return config_; }
  void set_learning_rate(double lr) noexcept { config_.learning_rate = lr; }
  std::int64_t steps() const noexcept { return steps_; }
  const Vector& first_moment() const noexcept { return m_; }
  const Vector& second_moment() const noexcept { return v_; }
  Eigen::Index size() const noexcept { return m_.size(); }

 private:
  AdamConfig config_;
  Vector m_;
  Vector v_;
  std::int64_t steps_ = 0;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace ratelab::nnet
