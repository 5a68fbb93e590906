#pragma once

#include <filesystem>

#include "json.hpp"
#include "ratelab/reward_model/reward_predictor.hpp"

namespace ratelab::reward {

// Dense-net checkpoint plus the predictor's own state:
//   {"format": "ratelab.reward_predictor/1", "net": {...dense net...},
//    "state_dim": 4, "action_dim": 2, "log_lambda_cls": -0.3,
//    "log_lambda_reg": 1.1, "log_lambda_limit": 4, "kappa": 30,
//    "alpha": 0.5, "variant": "full", "boundaries": [0, ..., 1]}

template <typename T>
nlohmann::json to_json(const RewardPredictor<T>& predictor);

template <typename T>
RewardPredictor<T> reward_predictor_from_json(const nlohmann::json& doc);

template <typename T>
void save_reward_predictor(const RewardPredictor<T>& predictor,
                           const std::filesystem::path& path);

template <typename T>
RewardPredictor<T> load_reward_predictor(const std::filesystem::path& path);

}  // namespace ratelab::reward
