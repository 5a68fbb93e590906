#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ratelab/common/random.hpp"
#include "ratelab/envs/environment.hpp"

namespace ratelab::segments {

/// Fixed-length slice of one episode, the unit a rater scores.
struct Segment {
  std::uint64_t segment_id = 0;
  std::string env_name;
  /// Environment step (within its episode) at which the slice begins.
  std::int64_t source_step = 0;
  /// One row per step: the state the action was taken in.
  Eigen::MatrixXd states;
  Eigen::MatrixXd actions;
  /// Ground-truth per-step rewards. Hidden from the learner.
  std::vector<double> step_rewards;
  double ground_truth_return = 0.0;

  int length() const noexcept { return static_cast<int>(states.rows()); }
  int state_dim() const noexcept { return static_cast<int>(states.cols()); }
  int action_dim() const noexcept { return static_cast<int>(actions.cols()); }
};

/// Throws std::invalid_argument if row counts, reward counts or the return
/// sum (1e-9) are inconsistent.
void validate(const Segment& segment);

/// Maps an observation to an in-bounds action. The generator is the
/// collector's stream, so stochastic policies stay reproducible.
using ActionPolicy =
    std::function<Eigen::VectorXd(const Eigen::VectorXd& state, Rng& rng)>;

/// Uniform random actions within the environment's bounds.
ActionPolicy uniform_random_policy(const envs::EnvSpec& spec);

/// Uniform random actions, each repeated with probability hold_probability
/// instead of being redrawn. Holding spreads segments over states that
/// independent draws rarely reach (sustained pushes, walls). The returned
/// policy keeps the last action between calls, so copies share it.
ActionPolicy sticky_random_policy(const envs::EnvSpec& spec, double hold_probability);

struct CollectionOptions {
  int length = 50;
  /// Start at a uniformly random offset in [0, horizon - length]; when false
  /// the segment starts at the first step of the episode.
  bool random_offset = true;
  /// Episodes that end before the segment completes are discarded and
  /// collection restarts with a fresh episode, at most this many times.
  int max_attempts = 64;
};

/// Runs `policy` from a fresh episode (reset seed drawn from `rng`) and
/// records `options.length` consecutive transitions. Segments never span an
/// episode boundary. Throws std::runtime_error when every attempt ends early.
Segment collect_segment(envs::Environment& env, const ActionPolicy& policy,
                        Rng& rng, const CollectionOptions& options,
                        std::uint64_t segment_id = 0);

}  // namespace ratelab::segments
