#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

#include "ratelab/envs/environment.hpp"
#include "ratelab/ppo/policy.hpp"

namespace ratelab::ppo {

struct EvaluationResult {
  /// Ground-truth return per episode.
  std::vector<double> returns;
  double mean = 0.0;
  /// Sample standard deviation over sqrt(episodes); 0 for one episode.
  double standard_error = 0.0;
};

using Controller = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Runs `episodes` full episodes on fresh clones of `env`; episode i is
/// reset with derive_seed(seed, i).
EvaluationResult evaluate_controller(const Controller& controller,
                                     const envs::Environment& env, int episodes,
                                     std::uint64_t seed);

/// Deterministic evaluation with the squashed mean action.
template <typename T>
EvaluationResult evaluate_policy(const GaussianPolicy<T>& policy,
                                 const envs::Environment& env, int episodes,
                                 std::uint64_t seed);

}  // namespace ratelab::ppo
