#pragma once

#include "ratelab/envs/environment.hpp"

namespace ratelab::envs {

struct PointMassParams {
  /// Acceleration (m/s^2) per unit of action.
  double accel_scale = 2.0;
  /// Width of the goal reward.
  double sigma = 0.5;
  /// Initial positions are uniform in [-init_range, init_range]^2.
  double init_range = 1.0;
  double goal_x = 0.0;
  double goal_y = 0.0;
};

/// Planar point mass. State (px, py, vx, vy), action is an acceleration in
/// [-1, 1]^2; reward exp(-|p - goal|^2 / sigma^2).
class PointMass final : public Environment {
 public:
  explicit PointMass(PointMassParams params = {});

  const PointMassParams& params() const noexcept { return params_; }
  double reward(const Eigen::VectorXd& state,
                const Eigen::VectorXd& action) const override;
  std::unique_ptr<Environment> clone() const override;

 protected:
  Eigen::VectorXd initial_physical_state(std::uint64_t seed) const override;
  Eigen::VectorXd integrate(const Eigen::VectorXd& physical,
                            const Eigen::VectorXd& action) const override;

 private:
  PointMassParams params_;
};

/// Saturated PD controller toward the goal; the scripted reference used to
/// judge learned point-mass policies.
Eigen::VectorXd point_mass_scripted_action(const PointMassParams& params,
                                           const Eigen::VectorXd& state,
                                           double kp = 3.0, double kd = 2.0);

}  // namespace ratelab::envs
