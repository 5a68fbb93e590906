#include "ratelab/envs/cartpole.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ratelab/common/random.hpp"

namespace ratelab::envs {

CartPoleBalance::CartPoleBalance(CartPoleParams params)
    : Environment(EnvSpec{"cartpole-balance", 4, 1,
                          Eigen::VectorXd::Constant(1, -1.0),
                          Eigen::VectorXd::Constant(1, 1.0), 200, 1.0}),
      params_(params) {}

double CartPoleBalance::reward(const Eigen::VectorXd& state,
                               const Eigen::VectorXd& /*action*/) const {
  if (std::abs(state(0)) >= params_.track_limit) return 0.0;
  return std::max(0.0, std::cos(state(2)));
}

std::unique_ptr<Environment> CartPoleBalance::clone() const {
  return std::make_unique<CartPoleBalance>(params_);
}

Eigen::VectorXd CartPoleBalance::initial_physical_state(
    std::uint64_t seed) const {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> noise(-params_.initial_noise,
                                               params_.initial_noise);
  Eigen::VectorXd s(4);
  for (int i = 0; i < 4; ++i) s(i) = noise(rng);
  return s;
}

Eigen::VectorXd CartPoleBalance::integrate(const Eigen::VectorXd& physical,
                                           const Eigen::VectorXd& action) const {
  const auto& p = params_;
  const double force = p.force_scale * action(0);
  const double total_mass = p.cart_mass + p.pole_mass;
  const double pole_moment = p.pole_mass * p.pole_half_length;
  const double h = kControlStep / kPhysicsSubsteps;

  double x = physical(0), x_dot = physical(1);
  double theta = physical(2), theta_dot = physical(3);
  for (int i = 0; i < kPhysicsSubsteps; ++i) {
    const double sin_t = std::sin(theta);
    const double cos_t = std::cos(theta);
    const double temp =
        (force + pole_moment * theta_dot * theta_dot * sin_t) / total_mass;
    const double theta_acc =
        (p.gravity * sin_t - cos_t * temp) /
            (p.pole_half_length *
             (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass)) -
        p.pole_damping * theta_dot;
    const double x_acc = temp - pole_moment * theta_acc * cos_t / total_mass;
    // semi-implicit Euler: velocities first, positions from new velocities
    x_dot += h * x_acc;
    theta_dot += h * theta_acc;
    x += h * x_dot;
    theta += h * theta_dot;
  }
  Eigen::VectorXd next(4);
  next << x, x_dot, theta, theta_dot;
  return next;
}

bool CartPoleBalance::is_terminal(const Eigen::VectorXd& physical) const {
  return std::abs(physical(0)) >= params_.track_limit;
}

}  // namespace ratelab::envs
