#include "ratelab/ppo/rollout.hpp"

#include <stdexcept>

#include "ratelab/common/errors.hpp"

namespace ratelab::ppo {

void RolloutBatch::check_consistent() const {
  const std::size_t n = log_probs.size();
  auto check = [n](const char* what, std::size_t got) {
    if (got != n) throw DimensionError(what, n, got);
  };
  check("rollout states", static_cast<std::size_t>(states.cols()));
  check("rollout raw actions", static_cast<std::size_t>(raw_actions.cols()));
  check("rollout actions", static_cast<std::size_t>(actions.cols()));
  check("rollout rewards", rewards.size());
  check("rollout env rewards", env_rewards.size());
  check("rollout values", values.size());
  check("rollout dones", dones.size());
  check("rollout truncation values", truncation_values.size());
  if (!advantages.empty()) check("rollout advantages", advantages.size());
  if (!returns.empty()) check("rollout returns", returns.size());
}

template <typename T>
std::vector<double> RewardSource<T>::rewards(const Eigen::MatrixXd& states,
                                            const Eigen::MatrixXd& actions,
                                            const std::vector<double>& env_rewards) const {
  if (predictor_ == nullptr) return env_rewards;
  using Matrix = typename reward::RewardPredictor<T>::Matrix;
  Matrix inputs(states.rows() + actions.rows(), states.cols());
  inputs.topRows(states.rows()) = states.template cast<T>();
  inputs.bottomRows(actions.rows()) = actions.template cast<T>();
  const Matrix out = predictor_->net().forward_batch(inputs);
  std::vector<double> r(static_cast<std::size_t>(out.cols()));
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    r[static_cast<std::size_t>(c)] = static_cast<double>(out(0, c));
  }
  return r;
}

namespace {

template <typename T>
std::vector<double> batch_values(const ValueNet<T>& value, const Eigen::MatrixXd& states) {
  const auto out = value.net().forward_batch(states.template cast<T>());
  std::vector<double> v(static_cast<std::size_t>(out.cols()));
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    v[static_cast<std::size_t>(c)] = static_cast<double>(out(0, c));
  }
  return v;
}

}  // namespace

template <typename T>
RolloutCollector<T>::RolloutCollector(std::unique_ptr<envs::Environment> env,
                                      std::uint64_t seed)
    : env_(std::move(env)), seed_(seed), rng_(make_rng(seed, 0)) {
  if (!env_) throw std::invalid_argument("rollout collector needs an environment");
  if (env_->started() && !env_->episode_over()) observation_ = env_->observation();
}

template <typename T>
void RolloutCollector<T>::start_episode() {
  observation_ = env_->reset(derive_seed(seed_, 1 + episodes_));
  ++episodes_;
  episode_return_ = 0.0;
}

template <typename T>
RolloutBatch RolloutCollector<T>::collect(const GaussianPolicy<T>& policy,
                                          const ValueNet<T>& value,
                                          const RewardSource<T>& reward, int steps) {
  if (steps < 1) throw std::invalid_argument("rollout needs at least one step");
  const auto& spec = env_->spec();
  const auto n = static_cast<std::size_t>(steps);

  RolloutBatch batch;
  batch.states.resize(spec.state_dim, steps);
  batch.raw_actions.resize(spec.action_dim, steps);
  batch.actions.resize(spec.action_dim, steps);
  batch.log_probs.reserve(n);
  batch.env_rewards.reserve(n);
  batch.dones.reserve(n);
  // Next states of horizon-truncated steps, valued in one pass below.
  std::vector<Eigen::Index> truncated;
  std::vector<Eigen::VectorXd> truncated_states;

  for (int t = 0; t < steps; ++t) {
    if (!env_->started() || env_->episode_over()) start_episode();
    const ActionSample a = policy.sample(observation_, rng_);
    const envs::Transition tr = env_->step(a.action);

    batch.states.col(t) = observation_;
    batch.raw_actions.col(t) = a.raw;
    batch.actions.col(t) = tr.action;
    batch.log_probs.push_back(a.log_prob);
    batch.env_rewards.push_back(tr.ground_truth_reward);
    batch.dones.push_back(tr.done ? 1 : 0);
    if (tr.done && !tr.terminated) {
      truncated.push_back(t);
      truncated_states.push_back(tr.next_state);
    }

    episode_return_ += tr.ground_truth_reward;
    ++total_steps_;
    observation_ = tr.next_state;
    if (tr.done) completed_returns_.push_back(episode_return_);
  }

  batch.rewards = reward.rewards(batch.states, batch.actions, batch.env_rewards);
  // Value every visited state plus the bootstrap states in one batch.
  const auto extra = static_cast<Eigen::Index>(truncated.size()) + 1;
  Eigen::MatrixXd value_inputs(spec.state_dim, steps + extra);
  value_inputs.leftCols(steps) = batch.states;
  for (std::size_t i = 0; i < truncated.size(); ++i) {
    value_inputs.col(steps + static_cast<Eigen::Index>(i)) = truncated_states[i];
  }
  value_inputs.col(steps + extra - 1) = observation_;
  const std::vector<double> v = batch_values(value, value_inputs);
  batch.values.assign(v.begin(), v.begin() + steps);
  batch.truncation_values.assign(n, 0.0);
  for (std::size_t i = 0; i < truncated.size(); ++i) {
    batch.truncation_values[static_cast<std::size_t>(truncated[i])] =
        v[n + i];
  }
  batch.last_value = env_->episode_over() ? 0.0 : v.back();
  return batch;
}

template <typename T>
RolloutBatch collect_rollout(const envs::Environment& env,
                             const GaussianPolicy<T>& policy,
                             const ValueNet<T>& value,
                             const RewardSource<T>& reward, int steps,
                             std::uint64_t seed) {
  RolloutCollector<T> collector(env.clone(), seed);
  return collector.collect(policy, value, reward, steps);
}

template class RewardSource<float>;
template class RewardSource<double>;
template class RolloutCollector<float>;
template class RolloutCollector<double>;

#define RATELAB_INSTANTIATE(T)                                                   \
  template RolloutBatch collect_rollout(const envs::Environment&,                \
                                        const GaussianPolicy<T>&,                \
                                        const ValueNet<T>&,                      \
                                        const RewardSource<T>&, int, std::uint64_t);

RATELAB_INSTANTIATE(float)
RATELAB_INSTANTIATE(double)

#undef RATELAB_INSTANTIATE

}  // namespace ratelab::ppo
