#include "ratelab/ppo/update.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ratelab/ppo/gae.hpp"

namespace ratelab::ppo {

double clipped_surrogate(double ratio, double advantage, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * advantage, clipped * advantage);
}

bool surrogate_clipped(double ratio, double advantage, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return clipped * advantage < ratio * advantage;
}

namespace {

template <typename T>
using NetMatrix = typename nnet::BasicDenseNet<T>::Matrix;

template <typename T>
NetMatrix<T> gather_states(const RolloutBatch& batch,
                           std::span<const std::size_t> columns) {
  NetMatrix<T> out(batch.states.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) =
        batch.states.col(static_cast<Eigen::Index>(columns[j])).template cast<T>();
  }
  return out;
}

void check_advantages(const RolloutBatch& batch, std::span<const double> advantages) {
  if (advantages.size() != batch.size()) {
    throw std::invalid_argument("advantages do not match the rollout length");
  }
}

}  // namespace

template <typename T>
SurrogateStats evaluate_surrogate(const GaussianPolicy<T>& policy,
                                  const RolloutBatch& batch,
                                  std::span<const double> advantages, double eps) {
  check_advantages(batch, advantages);
  if (batch.size() == 0) return {};
  SurrogateStats s;
  const auto mean = policy.mean_net()
                        .forward_batch(batch.states.template cast<T>())
                        .template cast<double>()
                        .eval();
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    const double lp = squashed_gaussian_log_prob(batch.raw_actions.col(c), mean.col(c),
                                                 policy.log_std());
    const double ratio = std::exp(lp - batch.log_probs[k]);
    s.surrogate += clipped_surrogate(ratio, advantages[k], eps);
    s.mean_ratio += ratio;
    s.approx_kl += batch.log_probs[k] - lp;
    if (std::abs(ratio - 1.0) > eps) s.clip_fraction += 1.0;
  }
  const double n = static_cast<double>(batch.size());
  s.surrogate /= n;
  s.mean_ratio /= n;
  s.approx_kl /= n;
  s.clip_fraction /= n;
  return s;
}

template <typename T>
PolicyGradient surrogate_gradient(GaussianPolicy<T>& policy,
                                  const RolloutBatch& batch,
                                  std::span<const std::size_t> columns,
                                  std::span<const double> advantages, double eps) {
  check_advantages(batch, advantages);
  if (columns.empty()) throw std::invalid_argument("surrogate over no samples");
  const auto m = static_cast<Eigen::Index>(columns.size());
  const int a_dim = policy.action_dim();
  const Eigen::VectorXd& log_std = policy.log_std();
  const Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();

  const auto mean = policy.mean_net()
                        .forward_train(gather_states<T>(batch, columns))
                        .template cast<double>()
                        .eval();
  PolicyGradient g;
  g.log_std = Eigen::VectorXd::Zero(a_dim);
  NetMatrix<T> out_grad(a_dim, m);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const std::size_t k = columns[static_cast<std::size_t>(j)];
    const auto c = static_cast<Eigen::Index>(k);
    const Eigen::VectorXd raw = batch.raw_actions.col(c);
    const double lp = squashed_gaussian_log_prob(raw, mean.col(j), log_std);
    const double ratio = std::exp(lp - batch.log_probs[k]);
    const double adv = advantages[k];
    g.stats.surrogate += clipped_surrogate(ratio, adv, eps) * inv_m;
    g.stats.mean_ratio += ratio * inv_m;
    g.stats.approx_kl += (batch.log_probs[k] - lp) * inv_m;
    if (std::abs(ratio - 1.0) > eps) g.stats.clip_fraction += inv_m;

    // d(ratio * A)/d lp = ratio * A when the unclipped branch is active.
    const double d_lp = surrogate_clipped(ratio, adv, eps) ? 0.0 : ratio * adv * inv_m;
    const Eigen::ArrayXd diff = (raw - mean.col(j)).array();
    out_grad.col(j) = (d_lp * diff * inv_var).matrix().template cast<T>();
    g.log_std.array() += d_lp * (diff.square() * inv_var - 1.0);
  }
  g.mean_net = policy.mean_net().backward(out_grad).parameters.template cast<double>();
  return g;
}

template <typename T>
PpoOptimizer<T>::PpoOptimizer(const GaussianPolicy<T>& policy, const ValueNet<T>& value,
                              const PpoConfig& config)
    : policy_(static_cast<Eigen::Index>(policy.mean_net().parameter_count()),
              nnet::AdamConfig{config.learning_rate}),
      log_std_(policy.action_dim(), nnet::AdamConfig{config.learning_rate}),
      value_(static_cast<Eigen::Index>(value.net().parameter_count()),
             nnet::AdamConfig{config.learning_rate}) {}

template <typename T>
PpoUpdateReport ppo_update(GaussianPolicy<T>& policy, ValueNet<T>& value,
                           PpoOptimizer<T>& optimizer, const RolloutBatch& batch,
                           const PpoConfig& config, Rng& rng) {
  using Vector = typename nnet::BasicDenseNet<T>::Vector;
  batch.check_consistent();
  if (batch.advantages.size() != batch.size() || batch.size() == 0) {
    throw std::invalid_argument("ppo_update needs computed advantages");
  }
  if (config.minibatch_size <= 0 || config.epochs <= 0) {
    throw std::invalid_argument("ppo epochs and minibatch size must be positive");
  }

  std::vector<double> advantages = batch.advantages;
  normalize_advantages(advantages);

  PpoUpdateReport report;
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), 0);
  const auto mb = static_cast<std::size_t>(config.minibatch_size);

  auto abort = [&](const std::string& why, int epoch) {
    report.aborted = true;
    report.diagnostic = why + " at epoch " + std::to_string(epoch);
  };

  for (int epoch = 0; epoch < config.epochs && !report.aborted; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += mb) {
      const std::span<const std::size_t> cols(order.data() + start,
                                              std::min(mb, order.size() - start));
      PolicyGradient pg = surrogate_gradient(policy, batch, cols, advantages, config.clip);

      const auto m = static_cast<Eigen::Index>(cols.size());
      const auto v = value.net().forward_train(gather_states<T>(batch, cols)).eval();
      NetMatrix<T> v_grad(1, m);
      double value_loss = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        const double diff = static_cast<double>(v(0, j)) -
                            batch.returns[cols[static_cast<std::size_t>(j)]];
        value_loss += diff * diff / static_cast<double>(m);
        v_grad(0, j) = static_cast<T>(config.value_coef * 2.0 * diff / static_cast<double>(m));
      }
      const double entropy = policy.entropy();
      const double loss = -pg.stats.surrogate + config.value_coef * value_loss -
                          config.entropy_coef * entropy;
      if (!std::isfinite(loss)) {
        abort("non-finite ppo loss", epoch);
        break;
      }

      Eigen::VectorXd g_policy = -pg.mean_net;
      Eigen::VectorXd g_log_std =
          -pg.log_std - Eigen::VectorXd::Constant(pg.log_std.size(), config.entropy_coef);
      Eigen::VectorXd g_value =
          value.net().backward(v_grad).parameters.template cast<double>();
      const double norm = std::sqrt(g_policy.squaredNorm() + g_log_std.squaredNorm() +
                                    g_value.squaredNorm());
      if (!std::isfinite(norm)) {
        abort("non-finite ppo gradient", epoch);
        break;
      }
      if (config.max_grad_norm > 0.0 && norm > config.max_grad_norm) {
        const double s = config.max_grad_norm / norm;
        g_policy *= s;
        g_log_std *= s;
        g_value *= s;
      }

      nnet::StepStatus st = optimizer.policy().step(
          policy.mean_net().mutable_parameters(), g_policy.template cast<T>().eval());
      Eigen::VectorXd ls = policy.log_std();
      if (st == nnet::StepStatus::applied) st = optimizer.log_std().step(ls, g_log_std);
      if (st == nnet::StepStatus::applied) {
        policy.set_log_std(ls);
        st = optimizer.value().step(value.net().mutable_parameters(),
                                    Vector(g_value.template cast<T>()));
      }
      if (st != nnet::StepStatus::applied) {
        abort("ppo step " + std::string(nnet::to_string(st)), epoch);
        break;
      }

      ++report.minibatches;
      report.policy_loss += -pg.stats.surrogate;
      report.value_loss += value_loss;
      report.mean_ratio += pg.stats.mean_ratio;
      report.clip_fraction += pg.stats.clip_fraction;
      report.approx_kl += pg.stats.approx_kl;
      report.entropy += entropy;
    }
  }
  if (report.minibatches > 0) {
    const double n = report.minibatches;
    report.policy_loss /= n;
    report.value_loss /= n;
    report.mean_ratio /= n;
    report.clip_fraction /= n;
    report.approx_kl /= n;
    report.entropy /= n;
  }
  return report;
}

template class PpoOptimizer<float>;
template class PpoOptimizer<double>;

#define RATELAB_INSTANTIATE(T)                                                     \
  template SurrogateStats evaluate_surrogate(const GaussianPolicy<T>&,             \
                                             const RolloutBatch&,                  \
                                             std::span<const double>, double);     \
  template PolicyGradient surrogate_gradient(GaussianPolicy<T>&, const RolloutBatch&, \
                                             std::span<const std::size_t>,         \
                                             std::span<const double>, double);     \
  template PpoUpdateReport ppo_update(GaussianPolicy<T>&, ValueNet<T>&,            \
                                      PpoOptimizer<T>&, const RolloutBatch&,       \
                                      const PpoConfig&, Rng&);

RATELAB_INSTANTIATE(float)
RATELAB_INSTANTIATE(double)

#undef RATELAB_INSTANTIATE

}  // namespace ratelab::ppo
