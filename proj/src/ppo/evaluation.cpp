#include "ratelab/ppo/evaluation.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ratelab/common/random.hpp"

namespace ratelab::ppo {

EvaluationResult evaluate_controller(const Controller& controller,
                                     const envs::Environment& env, int episodes,
                                     std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("evaluation needs at least one episode");
  EvaluationResult res;
  auto instance = env.clone();
  for (int i = 0; i < episodes; ++i) {
    Eigen::VectorXd obs = instance->reset(derive_seed(seed, static_cast<std::uint64_t>(i)));
    double ret = 0.0;
    while (!instance->episode_over()) {
      const auto tr = instance->step(controller(obs));
      ret += tr.ground_truth_reward;
      obs = tr.next_state;
    }
    res.returns.push_back(ret);
  }
  const double n = static_cast<double>(episodes);
  res.mean = std::accumulate(res.returns.begin(), res.returns.end(), 0.0) / n;
  if (episodes > 1) {
    double ss = 0.0;
    for (double r : res.returns) ss += (r - res.mean) * (r - res.mean);
    res.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return res;
}

template <typename T>
EvaluationResult evaluate_policy(const GaussianPolicy<T>& policy,
                                 const envs::Environment& env, int episodes,
                                 std::uint64_t seed) {
  return evaluate_controller(
      [&policy](const Eigen::VectorXd& s) { return policy.mean_action(s); }, env,
      episodes, seed);
}

template EvaluationResult evaluate_policy(const GaussianPolicy<float>&,
                                          const envs::Environment&, int, std::uint64_t);
template EvaluationResult evaluate_policy(const GaussianPolicy<double>&,
                                          const envs::Environment&, int, std::uint64_t);

}  // namespace ratelab::ppo
