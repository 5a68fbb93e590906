#include "ratelab/segments/segment.hpp"

#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>

namespace ratelab::segments {

void validate(const Segment& segment) {
  const auto rows = segment.states.rows();
  if (rows == 0) throw std::invalid_argument("segment has no steps");
  if (segment.actions.rows() != rows ||
      static_cast<Eigen::Index>(segment.step_rewards.size()) != rows) {
    throw std::invalid_argument("segment " + std::to_string(segment.segment_id) +
                                ": states, actions and rewards disagree in length");
  }
  const double sum = std::accumulate(segment.step_rewards.begin(),
                                     segment.step_rewards.end(), 0.0);
  if (std::abs(sum - segment.ground_truth_return) > 1e-9) {
    throw std::invalid_argument("segment " + std::to_string(segment.segment_id) +
                                ": return does not match reward sum");
  }
}

ActionPolicy uniform_random_policy(const envs::EnvSpec& spec) {
  return [low = spec.action_low, high = spec.action_high](
             const Eigen::VectorXd& /*state*/, Rng& rng) {
    Eigen::VectorXd a(low.size());
    for (Eigen::Index i = 0; i < low.size(); ++i) {
      std::uniform_real_distribution<double> dist(low(i), high(i));
      a(i) = dist(rng);
    }
    return a;
  };
}

ActionPolicy sticky_random_policy(const envs::EnvSpec& spec, double hold_probability) {
  if (!(hold_probability >= 0.0 && hold_probability < 1.0)) {
    throw std::invalid_argument("hold probability must be in [0, 1)");
  }
  auto draw = uniform_random_policy(spec);
  auto held = std::make_shared<Eigen::VectorXd>();
  return [draw = std::move(draw), held, hold_probability](const Eigen::VectorXd& state,
                                                          Rng& rng) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (held->size() == 0 || coin(rng) >= hold_probability) *held = draw(state, rng);
    return *held;
  };
}

Segment collect_segment(envs::Environment& env, const ActionPolicy& policy,
                        Rng& rng, const CollectionOptions& options,
                        std::uint64_t segment_id) {
  const auto& spec = env.spec();
  if (options.length <= 0 || options.length > spec.horizon) {
    throw std::invalid_argument("segment length must be in [1, horizon]");
  }
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    const std::uint64_t episode_seed = rng();
    int offset = 0;
    if (options.random_offset) {
      std::uniform_int_distribution<int> pick(0, spec.horizon - options.length);
      offset = pick(rng);
    }

    Eigen::VectorXd state = env.reset(episode_seed);
    bool ended_early = false;
    for (int t = 0; t < offset; ++t) {
      const auto tr = env.step(policy(state, rng));
      state = tr.next_state;
      if (tr.done) {
        ended_early = true;
        break;
      }
    }
    if (ended_early) continue;

    Segment seg;
    seg.segment_id = segment_id;
    seg.env_name = spec.name;
    seg.source_step = offset;
    seg.states.resize(options.length, spec.state_dim);
    seg.actions.resize(options.length, spec.action_dim);
    seg.step_rewards.reserve(static_cast<std::size_t>(options.length));
    for (int t = 0; t < options.length; ++t) {
      const auto tr = env.step(policy(state, rng));
      seg.states.row(t) = tr.state.transpose();
      seg.actions.row(t) = tr.action.transpose();
      seg.step_rewards.push_back(tr.ground_truth_reward);
      seg.ground_truth_return += tr.ground_truth_reward;
      state = tr.next_state;
      // the final transition may close the episode; anything earlier may not
      if (tr.done && t + 1 < options.length) {
        ended_early = true;
        break;
      }
    }
    if (!ended_early) return seg;
  }
  throw std::runtime_error("could not collect a complete segment from '" +
                           spec.name + "' within " +
                           std::to_string(options.max_attempts) + " attempts");
}

}  // namespace ratelab::segments
