#include "ratelab/ppo/gae.hpp"

#include <cmath>
#include <numeric>

namespace ratelab::ppo {

void compute_gae(RolloutBatch& batch, double gamma, double lambda) {
  batch.check_consistent();
  const std::size_t n = batch.size();
  batch.advantages.assign(n, 0.0);
  batch.returns.assign(n, 0.0);
  double next_advantage = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double keep = batch.dones[k] ? 0.0 : 1.0;
    const double next_value = k + 1 < n ? batch.values[k + 1] : batch.last_value;
    const double delta = batch.rewards[k] +
                         gamma * (next_value * keep + batch.truncation_values[k]) -
                         batch.values[k];
    next_advantage = delta + gamma * lambda * keep * next_advantage;
    batch.advantages[k] = next_advantage;
    batch.returns[k] = next_advantage + batch.values[k];
  }
}

void normalize_advantages(std::vector<double>& advantages) {
  if (advantages.empty()) return;
  const double n = static_cast<double>(advantages.size());
  const double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  const double scale = 1.0 / (std::sqrt(var / n) + 1e-8);
  for (double& a : advantages) a = (a - mean) * scale;
}

}  // namespace ratelab::ppo
