#include "ratelab/reward_model/checkpoint.hpp"

#include "ratelab/common/errors.hpp"
#include "ratelab/nnet/serialization.hpp"

namespace ratelab::reward {

namespace {
constexpr const char* kFormat = "ratelab.reward_predictor/1";
}

template <typename T>
nlohmann::json to_json(const RewardPredictor<T>& predictor) {
  return {{"format", kFormat},
          {"net", nnet::to_json(predictor.net())},
          {"state_dim", predictor.state_dim()},
          {"action_dim", predictor.action_dim()},
          {"log_lambda_cls", predictor.log_lambda_cls()},
          {"log_lambda_reg", predictor.log_lambda_reg()},
          {"log_lambda_limit", predictor.config().log_lambda_limit},
          {"kappa", predictor.kappa()},
          {"alpha", predictor.alpha()},
          {"variant", std::string(to_string(predictor.variant()))},
          {"boundaries", predictor.boundaries().edges},
          {"boundaries_degenerate", predictor.boundaries().degenerate}};
}

template <typename T>
RewardPredictor<T> reward_predictor_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kFormat) {
      throw FormatError("unsupported reward predictor format");
    }
    auto net = nnet::dense_net_from_json<T>(doc.at("net"));
    RewardModelConfig config;
    config.hidden_layers.assign(net.widths().begin() + 1, net.widths().end() - 1);
    config.kappa = doc.at("kappa").get<double>();
    config.alpha = doc.at("alpha").get<double>();
    config.log_lambda_limit = doc.value("log_lambda_limit", 4.0);
    config.variant = parse_loss_variant(doc.at("variant").get<std::string>());
    RewardPredictor<T> predictor(doc.at("state_dim").get<int>(),
                                 doc.at("action_dim").get<int>(), std::move(net),
                                 config);
    predictor.set_log_lambda_cls(doc.at("log_lambda_cls").get<double>());
    predictor.set_log_lambda_reg(doc.at("log_lambda_reg").get<double>());
    segments::RatingBoundaries b;
    b.edges = doc.at("boundaries").get<std::vector<double>>();
    b.degenerate = doc.value("boundaries_degenerate", false);
    predictor.set_boundaries(std::move(b));
    return predictor;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed reward predictor checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid reward predictor checkpoint: ") + e.what());
  }
}

template <typename T>
void save_reward_predictor(const RewardPredictor<T>& predictor,
                           const std::filesystem::path& path) {
  nnet::write_json_file(to_json(predictor), path);
}

template <typename T>
RewardPredictor<T> load_reward_predictor(const std::filesystem::path& path) {
  return reward_predictor_from_json<T>(nnet::read_json_file(path));
}

#define RATELAB_INSTANTIATE(T)                                                 \
  template nlohmann::json to_json(const RewardPredictor<T>&);                  \
  template RewardPredictor<T> reward_predictor_from_json<T>(                   \
      const nlohmann::json&);                                                  \
  template void save_reward_predictor(const RewardPredictor<T>&,               \
                                      const std::filesystem::path&);           \
  template RewardPredictor<T> load_reward_predictor<T>(                        \
      const std::filesystem::path&);

RATELAB_INSTANTIATE(float)
RATELAB_INSTANTIATE(double)

#undef RATELAB_INSTANTIATE

}  // namespace ratelab::reward
