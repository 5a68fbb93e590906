#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "ratelab/segments/rating.hpp"

namespace ratelab::segments {

// One RatingExample per JSONL line:
//   {"segment_id": 7, "env": "point-mass", "source_step": 12,
//    "states": [[...], ...], "actions": [[...], ...],
//    "step_rewards": [...], "ground_truth_return": 3.2,
//    "rating": 1, "n_classes": 4, "rater": "synthetic", "rater_id": ""}

nlohmann::json segment_to_json(const Segment& segment);
Segment segment_from_json(const nlohmann::json& doc);

nlohmann::json example_to_json(const RatingExample& example, int n_classes);
RatingExample example_from_json(const nlohmann::json& doc, int n_classes);

/// Writes one line and flushes the stream.
void append_jsonl(std::ostream& out, const RatingExample& example,
                  int n_classes);

void save_jsonl(const RatingDataset& dataset, const std::filesystem::path& path);

/// Throws FormatError naming the offending line.
RatingDataset load_jsonl(const std::filesystem::path& path, int n_classes);

/// Row-per-step matrix as nested arrays, and back.
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& doc);

}  // namespace ratelab::segments
