#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace ratelab::envs {

/// Control step shared by every environment (seconds).
inline constexpr double kControlStep = 0.02;
/// Semi-implicit Euler substeps per control step.
inline constexpr int kPhysicsSubsteps = 10;

struct EnvSpec {
  std::string name;
  int state_dim = 0;
  int action_dim = 0;
  Eigen::VectorXd action_low;
  Eigen::VectorXd action_high;
  int horizon = 0;
  double max_step_reward = 1.0;
};

struct Transition {
  Eigen::VectorXd state;
  /// Action actually applied, after clamping to the bounds.
  Eigen::VectorXd action;
  Eigen::VectorXd next_state;
  /// Reward of taking `action` in `state`, in [0, max_step_reward].
  double ground_truth_reward = 0.0;
  /// Episode over (terminal state or horizon reached).
  bool done = false;
  /// Episode over because of a terminal state, not the horizon.
  bool terminated = false;
  bool action_clamped = false;
};

/// Episodic continuous-control task with a known per-step reward.
///
/// Observations are what the learner sees; subclasses may integrate a
/// different internal physical state (the pendulum integrates the angle but
/// observes its cosine and sine).
class Environment {
 public:
  virtual ~Environment() = default;

  const EnvSpec& spec() const noexcept { return spec_; }

  Eigen::VectorXd reset(std::uint64_t seed);
  /// Out-of-bounds actions are clamped and flagged in the transition.
  /// Throws StateError if the episode is over or reset() was never called,
  /// DimensionError on a wrongly sized action.
  Transition step(const Eigen::VectorXd& action);

  Eigen::VectorXd observation() const { return observe(physical_); }
  const Eigen::VectorXd& physical_state() const noexcept { return physical_; }
  /// Places the system in an explicit physical state and starts a fresh
  /// episode from it.
  void set_physical_state(const Eigen::VectorXd& physical);

  int elapsed_steps() const noexcept { return elapsed_; }
  bool episode_over() const noexcept { return over_; }
  bool started() const noexcept { return started_; }

  /// Ground-truth reward of taking `action` at observation `state`.
  virtual double reward(const Eigen::VectorXd& state,
                        const Eigen::VectorXd& action) const = 0;

  /// A fresh, unstarted instance of the same environment.
  virtual std::unique_ptr<Environment> clone() const = 0;

 protected:
  explicit Environment(EnvSpec spec);

  virtual Eigen::VectorXd initial_physical_state(std::uint64_t seed) const = 0;
  virtual Eigen::VectorXd integrate(const Eigen::VectorXd& physical,
                                    const Eigen::VectorXd& action) const = 0;
  virtual Eigen::VectorXd observe(const Eigen::VectorXd& physical) const {
    return physical;
  }
  virtual bool is_terminal(const Eigen::VectorXd& physical) const {
    return false;
  }

 private:
  EnvSpec spec_;
  Eigen::VectorXd physical_;
  int elapsed_ = 0;
  bool over_ = false;
  bool started_ = false;
};

/// Names accepted by make_environment().
std::vector<std::string> environment_names();

/// Throws std::invalid_argument for unknown names.
std::unique_ptr<Environment> make_environment(std::string_view name);

}  // namespace ratelab::envs
