#include "ratelab/ppo/policy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ratelab/common/errors.hpp"
#include "ratelab/nnet/serialization.hpp"

namespace ratelab::ppo {

namespace {

std::vector<int> with_ends(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> widths{in};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(out);
  return widths;
}

constexpr double kHalfLogTwoPi = 0.91893853320467274178;

}  // namespace

double log_tanh_slope(double x) {
  // log(1 - tanh^2 x) = 2 (log 2 - x - softplus(-2x))
  const double y = -2.0 * x;
  const double softplus = y > 0.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y));
  return 2.0 * (std::numbers::ln2 - x - softplus);
}

double squashed_gaussian_log_prob(const Eigen::VectorXd& raw,
                                  const Eigen::VectorXd& mean,
                                  const Eigen::VectorXd& log_std) {
  double lp = 0.0;
  for (Eigen::Index d = 0; d < raw.size(); ++d) {
    const double z = (raw(d) - mean(d)) * std::exp(-log_std(d));
    lp += -0.5 * z * z - log_std(d) - kHalfLogTwoPi - log_tanh_slope(raw(d));
  }
  return lp;
}

template <typename T>
GaussianPolicy<T>::GaussianPolicy(const envs::EnvSpec& spec,
                                  const PolicyConfig& config, Rng& rng)
    : config_(config),
      mean_net_(Net::xavier(with_ends(spec.state_dim, config.hidden_layers,
                                      spec.action_dim),
                            nnet::Activation::identity, rng)),
      log_std_(Eigen::VectorXd::Constant(spec.action_dim, config.initial_log_std)),
      low_(spec.action_low),
      high_(spec.action_high) {
  const int last = mean_net_.layer_count() - 1;
  mean_net_.weight(last) *= static_cast<T>(config_.output_layer_scale);
  set_log_std(log_std_);
}

template <typename T>
GaussianPolicy<T>::GaussianPolicy(const envs::EnvSpec& spec,
                                  const PolicyConfig& config, Net mean_net,
                                  Eigen::VectorXd log_std)
    : config_(config),
      mean_net_(std::move(mean_net)),
      low_(spec.action_low),
      high_(spec.action_high) {
  if (mean_net_.input_size() != spec.state_dim ||
      mean_net_.output_size() != spec.action_dim) {
    throw DimensionError("policy mean net", static_cast<std::size_t>(spec.action_dim),
                         static_cast<std::size_t>(mean_net_.output_size()));
  }
  if (log_std.size() != spec.action_dim) {
    throw DimensionError("policy log std", static_cast<std::size_t>(spec.action_dim),
                         static_cast<std::size_t>(log_std.size()));
  }
  set_log_std(log_std);
}

template <typename T>
void GaussianPolicy<T>::set_log_std(const Eigen::VectorXd& values) {
  if (values.size() != action_dim()) {
    throw DimensionError("policy log std", static_cast<std::size_t>(action_dim()),
                         static_cast<std::size_t>(values.size()));
  }
  if (!values.allFinite()) throw NonFiniteError("policy log std not finite");
  log_std_ = values.cwiseMax(config_.log_std_min).cwiseMin(config_.log_std_max);
}

template <typename T>
Eigen::VectorXd GaussianPolicy<T>::mean(const Eigen::VectorXd& state) const {
  return mean_net_.forward(state.template cast<T>()).template cast<double>();
}

template <typename T>
Eigen::VectorXd GaussianPolicy<T>::squash(const Eigen::VectorXd& raw) const {
  const Eigen::ArrayXd unit = raw.array().tanh();
  return (low_.array() + 0.5 * (unit + 1.0) * (high_ - low_).array()).matrix();
}

template <typename T>
ActionSample GaussianPolicy<T>::sample(const Eigen::VectorXd& state, Rng& rng) const {
  const Eigen::VectorXd mu = mean(state);
  std::normal_distribution<double> normal(0.0, 1.0);
  ActionSample s;
  s.raw.resize(mu.size());
  for (Eigen::Index d = 0; d < mu.size(); ++d) {
    s.raw(d) = mu(d) + std::exp(log_std_(d)) * normal(rng);
  }
  s.action = squash(s.raw);
  s.log_prob = squashed_gaussian_log_prob(s.raw, mu, log_std_);
  return s;
}

template <typename T>
Eigen::VectorXd GaussianPolicy<T>::mean_action(const Eigen::VectorXd& state) const {
  return squash(mean(state));
}

template <typename T>
double GaussianPolicy<T>::log_prob(const Eigen::VectorXd& state,
                                   const Eigen::VectorXd& raw) const {
  return squashed_gaussian_log_prob(raw, mean(state), log_std_);
}

template <typename T>
double GaussianPolicy<T>::entropy() const {
  return log_std_.sum() + static_cast<double>(log_std_.size()) * (kHalfLogTwoPi + 0.5);
}

template <typename T>
ValueNet<T>::ValueNet(int state_dim, const std::vector<int>& hidden_layers, Rng& rng)
    : net_(Net::xavier(with_ends(state_dim, hidden_layers, 1),
                       nnet::Activation::identity, rng)) {}

template <typename T>
ValueNet<T>::ValueNet(Net net) : net_(std::move(net)) {
  if (net_.output_size() != 1) throw std::invalid_argument("value net must have one output");
}

template <typename T>
double ValueNet<T>::value(const Eigen::VectorXd& state) const {
  return static_cast<double>(net_.forward(state.template cast<T>())(0));
}

template <typename T>
nlohmann::json to_json(const GaussianPolicy<T>& policy) {
  const auto& ls = policy.log_std();
  return {{"format", "ratelab.gaussian_policy/1"},
          {"mean_net", nnet::to_json(policy.mean_net())},
          {"log_std", std::vector<double>(ls.data(), ls.data() + ls.size())}};
}

template <typename T>
GaussianPolicy<T> policy_from_json(const envs::EnvSpec& spec,
                                   const nlohmann::json& doc) {
  try {
    auto net = nnet::dense_net_from_json<T>(doc.at("mean_net"));
    const auto ls = doc.at("log_std").get<std::vector<double>>();
    PolicyConfig config;
    config.hidden_layers.assign(net.widths().begin() + 1, net.widths().end() - 1);
    return GaussianPolicy<T>(spec, config, std::move(net),
                             Eigen::Map<const Eigen::VectorXd>(
                                 ls.data(), static_cast<Eigen::Index>(ls.size())));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed policy checkpoint: ") + e.what());
  }
}

template <typename T>
void save_policy(const GaussianPolicy<T>& policy, const ValueNet<T>& value,
                 const std::filesystem::path& path) {
  nlohmann::json doc = {{"policy", to_json(policy)},
                        {"value", nnet::to_json(value.net())}};
  nnet::write_json_file(doc, path);
}

template class GaussianPolicy<float>;
template class GaussianPolicy<double>;
template class ValueNet<float>;
template class ValueNet<double>;

#define RATELAB_INSTANTIATE(T)                                                  \
  template nlohmann::json to_json(const GaussianPolicy<T>&);                    \
  template GaussianPolicy<T> policy_from_json<T>(const envs::EnvSpec&,          \
                                                 const nlohmann::json&);        \
  template void save_policy(const GaussianPolicy<T>&, const ValueNet<T>&,       \
                            const std::filesystem::path&);

RATELAB_INSTANTIATE(float)
RATELAB_INSTANTIATE(double)

#undef RATELAB_INSTANTIATE

}  // namespace ratelab::ppo
