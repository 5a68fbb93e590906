#pragma once

#include "ratelab/envs/environment.hpp"

namespace ratelab::envs {

struct CartPoleParams {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 1.0;
  /// Pivot to pole centre of mass (m).
  double pole_half_length = 0.5;
  /// Newtons per unit of action.
  double force_scale = 20.0;
  /// Viscous damping on the pole joint (1/s).
  double pole_damping = 1.0;
  double track_limit = 2.4;
  double initial_noise = 0.05;
};

/// Cart-pole balance. State (x, x_dot, theta, theta_dot) with theta = 0
/// upright; action is a horizontal force in [-1, 1] (scaled by force_scale).
/// Reward max(0, cos theta) while |x| < track_limit, 0 otherwise. Leaving the
/// track ends the episode.
class CartPoleBalance final : public Environment {
 public:
  explicit CartPoleBalance(CartPoleParams params = {});

  const CartPoleParams& params() const noexcept { return params_; }
  double reward(const Eigen::VectorXd& state,
                const Eigen::VectorXd& action) const override;
  std::unique_ptr<Environment> clone() const override;

 protected:
  Eigen::VectorXd initial_physical_state(std::uint64_t seed) const override;
  Eigen::VectorXd integrate(const Eigen::VectorXd& physical,
                            const Eigen::VectorXd& action) const override;
  bool is_terminal(const Eigen::VectorXd& physical) const override;

 private:
  CartPoleParams params_;
};

}  // namespace ratelab::envs
