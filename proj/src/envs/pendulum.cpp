#include "ratelab/envs/pendulum.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "ratelab/common/random.hpp"

namespace ratelab::envs {

PendulumSwingup::PendulumSwingup(PendulumParams params)
    : Environment(EnvSpec{"pendulum-swingup", 3, 1,
                          Eigen::VectorXd::Constant(1, -1.0),
                          Eigen::VectorXd::Constant(1, 1.0), 200, 1.0}),
      params_(params) {}

double PendulumSwingup::reward(const Eigen::VectorXd& state,
                               const Eigen::VectorXd& /*action*/) const {
  return 0.5 * (1.0 + state(0));
}

std::unique_ptr<Environment> PendulumSwingup::clone() const {
  return std::make_unique<PendulumSwingup>(params_);
}

double PendulumSwingup::mechanical_energy(
    const Eigen::VectorXd& physical) const {
  const auto& p = params_;
  const double inertia = p.mass * p.length * p.length;
  return 0.5 * inertia * physical(1) * physical(1) +
         p.mass * p.gravity * p.length * std::cos(physical(0));
}

Eigen::VectorXd PendulumSwingup::initial_physical_state(
    std::uint64_t seed) const {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> noise(-params_.initial_noise,
                                               params_.initial_noise);
  Eigen::VectorXd s(2);
  s(0) = std::numbers::pi + noise(rng);
  s(1) = noise(rng);
  return s;
}

Eigen::VectorXd PendulumSwingup::integrate(const Eigen::VectorXd& physical,
                                           const Eigen::VectorXd& action) const {
  const auto& p = params_;
  const double h = kControlStep / kPhysicsSubsteps;
  const double torque = p.max_torque * action(0);
  const double inertia = p.mass * p.length * p.length;
  double theta = physical(0), theta_dot = physical(1);
  for (int i = 0; i < kPhysicsSubsteps; ++i) {
    const double acc = p.gravity / p.length * std::sin(theta) +
                       torque / inertia - p.damping * theta_dot;
    theta_dot += h * acc;
    theta += h * theta_dot;
  }
  // keep theta in (-pi, pi]; observations only see cos/sin
  theta = std::remainder(theta, 2.0 * std::numbers::pi);
  Eigen::VectorXd next(2);
  next << theta, theta_dot;
  return next;
}

Eigen::VectorXd PendulumSwingup::observe(const Eigen::VectorXd& physical) const {
  Eigen::VectorXd obs(3);
  obs << std::cos(physical(0)), std::sin(physical(0)), physical(1);
  return obs;
}

}  // namespace ratelab::envs
