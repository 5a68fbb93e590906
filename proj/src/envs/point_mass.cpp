#include "ratelab/envs/point_mass.hpp"

#include <cmath>
#include <random>

#include "ratelab/common/random.hpp"

namespace ratelab::envs {

PointMass::PointMass(PointMassParams params)
    : Environment(EnvSpec{"point-mass", 4, 2,
                          Eigen::VectorXd::Constant(2, -1.0),
                          Eigen::VectorXd::Constant(2, 1.0), 150, 1.0}),
      params_(params) {}

double PointMass::reward(const Eigen::VectorXd& state,
                         const Eigen::VectorXd& /*action*/) const {
  const double dx = state(0) - params_.goal_x;
  const double dy = state(1) - params_.goal_y;
  return std::exp(-(dx * dx + dy * dy) / (params_.sigma * params_.sigma));
}

std::unique_ptr<Environment> PointMass::clone() const {
  return std::make_unique<PointMass>(params_);
}

Eigen::VectorXd PointMass::initial_physical_state(std::uint64_t seed) const {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> pos(-params_.init_range,
                                             params_.init_range);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(4);
  s(0) = pos(rng);
  s(1) = pos(rng);
  return s;
}

Eigen::VectorXd PointMass::integrate(const Eigen::VectorXd& physical,
                                     const Eigen::VectorXd& action) const {
  const double h = kControlStep / kPhysicsSubsteps;
  Eigen::Vector2d pos = physical.head<2>();
  Eigen::Vector2d vel = physical.tail<2>();
  const Eigen::Vector2d acc = params_.accel_scale * action.head<2>();
  for (int i = 0; i < kPhysicsSubsteps; ++i) {
    vel += h * acc;
    pos += h * vel;
  }
  Eigen::VectorXd next(4);
  next << pos, vel;
  return next;
}

Eigen::VectorXd point_mass_scripted_action(const PointMassParams& params,
                                           const Eigen::VectorXd& state,
                                           double kp, double kd) {
  Eigen::VectorXd a(2);
  a(0) = -kp * (state(0) - params.goal_x) - kd * state(2);
  a(1) = -kp * (state(1) - params.goal_y) - kd * state(3);
  return a.cwiseMax(-1.0).cwiseMin(1.0);
}

}  // namespace ratelab::envs
