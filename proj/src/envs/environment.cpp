#include "ratelab/envs/environment.hpp"

#include <stdexcept>
#include <utility>

#include "ratelab/common/errors.hpp"

namespace ratelab::envs {

Environment::Environment(EnvSpec spec) : spec_(std::move(spec)) {
  if (spec_.state_dim <= 0 || spec_.action_dim <= 0 || spec_.horizon <= 0 ||
      spec_.max_step_reward <= 0.0 ||
      spec_.action_low.size() != spec_.action_dim ||
      spec_.action_high.size() != spec_.action_dim ||
      (spec_.action_high.array() < spec_.action_low.array()).any()) {
    throw std::invalid_argument("inconsistent environment spec for '" +
                                spec_.name + "'");
  }
}

Eigen::VectorXd Environment::reset(std::uint64_t seed) {
  physical_ = initial_physical_state(seed);
  elapsed_ = 0;
  over_ = false;
  started_ = true;
  return observe(physical_);
}

void Environment::set_physical_state(const Eigen::VectorXd& physical) {
  if (started_ && physical.size() != physical_.size()) {
    throw DimensionError("physical state",
                         static_cast<std::size_t>(physical_.size()),
                         static_cast<std::size_t>(physical.size()));
  }
  physical_ = physical;
  elapsed_ = 0;
  over_ = false;
  started_ = true;
}

Transition Environment::step(const Eigen::VectorXd& action) {
  if (!started_) throw StateError(spec_.name + ": step() before reset()");
  if (over_) throw StateError(spec_.name + ": step() after episode end");
  if (action.size() != spec_.action_dim) {
    throw DimensionError(spec_.name + " action",
                         static_cast<std::size_t>(spec_.action_dim),
                         static_cast<std::size_t>(action.size()));
  }

  Transition t;
  t.state = observe(physical_);
  t.action = action.cwiseMax(spec_.action_low).cwiseMin(spec_.action_high);
  t.action_clamped = !(t.action.array() == action.array()).all();
  t.ground_truth_reward = reward(t.state, t.action);

  physical_ = integrate(physical_, t.action);
  ++elapsed_;
  t.next_state = observe(physical_);
  t.terminated = is_terminal(physical_);
  t.done = t.terminated || elapsed_ >= spec_.horizon;
  over_ = t.done;
  return t;
}

}  // namespace ratelab::envs
