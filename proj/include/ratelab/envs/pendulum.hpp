#pragma once

#include "ratelab/envs/environment.hpp"

namespace ratelab::envs {

struct PendulumParams {
  double gravity = 9.8;
  double mass = 1.0;
  double length = 0.5;
  /// Torque (N m) per unit of action.
  double max_torque = 2.0;
  /// Viscous joint damping (1/s); zero gives a conservative system.
  double damping = 0.05;
  double initial_noise = 0.1;
};

/// Pendulum swing-up. Physical state (theta, theta_dot) with theta = 0
/// upright; observation (cos theta, sin theta, theta_dot). Episodes start
/// hanging down. Reward (1 + cos theta) / 2.
class PendulumSwingup final : public Environment {
 public:
  explicit PendulumSwingup(PendulumParams params = {});

  const PendulumParams& params() const noexcept { return params_; }
  double reward(const Eigen::VectorXd& state,
                const Eigen::VectorXd& action) const override;
  std::unique_ptr<Environment> clone() const override;

  /// Kinetic plus potential energy of a physical state (theta, theta_dot),
  /// potential measured from the pivot.
  double mechanical_energy(const Eigen::VectorXd& physical) const;

 protected:
  Eigen::VectorXd initial_physical_state(std::uint64_t seed) const override;
  Eigen::VectorXd integrate(const Eigen::VectorXd& physical,
                            const Eigen::VectorXd& action) const override;
  Eigen::VectorXd observe(const Eigen::VectorXd& physical) const override;

 private:
  PendulumParams params_;
};

}  // namespace ratelab::envs
