#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"
#include "ratelab/nnet/dense_net.hpp"

namespace ratelab::nnet {

// Checkpoint layout:
//   {"format": "ratelab.dense_net/1",
//    "widths": [in, h1, ..., out],
//    "hidden_activation": "tanh", "output_activation": "sigmoid",
//    "layers": [{"weights": [[row 0], [row 1], ...], "bias": [...]}, ...]}
// Values are written as doubles with round-trip precision.

template <typename T>
nlohmann::json to_json(const BasicDenseNet<T>& net);

/// Throws FormatError on malformed input or when the stored shapes disagree
/// with the header. When expected_widths is given the header must match it.
template <typename T>
BasicDenseNet<T> dense_net_from_json(
    const nlohmann::json& doc,
    const std::optional<std::vector<int>>& expected_widths = std::nullopt);

template <typename T>
void save_dense_net(const BasicDenseNet<T>& net,
                    const std::filesystem::path& path);

template <typename T>
BasicDenseNet<T> load_dense_net(
    const std::filesystem::path& path,
    const std::optional<std::vector<int>>& expected_widths = std::nullopt);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& doc,
                     const std::filesystem::path& path);

}  // namespace ratelab::nnet
