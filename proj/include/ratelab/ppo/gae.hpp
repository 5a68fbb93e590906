#pragma once

#include "ratelab/ppo/rollout.hpp"

namespace ratelab::ppo {

/// Generalized advantage estimation over a rollout, filling
/// batch.advantages and batch.returns (= advantage + value):
///   delta_t = r_t + gamma * (V(s_{t+1}) (1 - done_t) + truncation_t) - V(s_t)
///   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
/// V(s_{t+1}) is values[t+1], or last_value after the final step.
void compute_gae(RolloutBatch& batch, double gamma, double lambda);

/// Rescales to mean 0, std 1 (population std, plus 1e-8).
void normalize_advantages(std::vector<double>& advantages);

}  // namespace ratelab::ppo
