#include "ratelab/segments/rating.hpp"

#include <algorithm>
#include <stdexcept>

namespace ratelab::segments {

std::string_view to_string(RaterKind kind) {
  return kind == RaterKind::human ? "human" : "synthetic";
}

RaterKind parse_rater_kind(std::string_view name) {
  if (name == "human") return RaterKind::human;
  if (name == "synthetic") return RaterKind::synthetic;
  throw std::invalid_argument("unknown rater kind '" + std::string(name) + "'");
}

RatingExample make_rating_example(Segment segment, int rating, int n_classes,
                                  RaterKind rater, std::string rater_id) {
  if (rating < 0 || rating >= n_classes) {
    throw std::out_of_range("rating " + std::to_string(rating) +
                            " outside [0, " + std::to_string(n_classes) + ")");
  }
  RatingExample ex;
  ex.segment = std::move(segment);
  ex.rating = rating;
  ex.onehot_target.assign(static_cast<std::size_t>(n_classes), 0.0);
  ex.onehot_target[static_cast<std::size_t>(rating)] = 1.0;
  ex.rater = rater;
  ex.rater_id = std::move(rater_id);
  return ex;
}

RatingDataset::RatingDataset(int n_classes) : n_classes_(n_classes) {
  if (n_classes < kMinClasses || n_classes > kMaxClasses) {
    throw std::invalid_argument("rating datasets support 2 to 6 classes, got " +
                                std::to_string(n_classes));
  }
  counts_.assign(static_cast<std::size_t>(n_classes), 0);
}

void RatingDataset::add(RatingExample example) {
  if (example.rating < 0 || example.rating >= n_classes_) {
    throw std::invalid_argument("rating out of range for dataset");
  }
  if (example.onehot_target.size() != static_cast<std::size_t>(n_classes_)) {
    throw std::invalid_argument("one-hot target has the wrong class count");
  }
  if (!ids_.insert(example.segment.segment_id).second) {
    throw std::invalid_argument("segment " +
                                std::to_string(example.segment.segment_id) +
                                " is already rated");
  }
  ++counts_[static_cast<std::size_t>(example.rating)];
  examples_.push_back(std::move(example));
}

int synthetic_rate(double value, std::span<const double> boundaries) {
  return static_cast<int>(
      std::upper_bound(boundaries.begin(), boundaries.end(), value) -
      boundaries.begin());
}

int synthetic_rate(const Segment& segment, std::span<const double> boundaries) {
  return synthetic_rate(segment.ground_truth_return, boundaries);
}

std::vector<double> default_synthetic_boundaries(const envs::EnvSpec& spec,
                                                 int n_classes, int length,
                                                 double top_fraction) {
  if (n_classes < 2) throw std::invalid_argument("need at least two classes");
  const double top = top_fraction * length * spec.max_step_reward;
  std::vector<double> edges;
  for (int i = 1; i < n_classes; ++i) {
    edges.push_back(top * i / n_classes);
  }
  return edges;
}

void validate_synthetic_boundaries(std::span<const double> boundaries) {
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    if (!(boundaries[i] > boundaries[i - 1])) {
      throw std::invalid_argument("synthetic boundaries must strictly increase");
    }
  }
}

}  // namespace ratelab::segments
