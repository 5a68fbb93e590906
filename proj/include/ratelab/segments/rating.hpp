#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "ratelab/segments/segment.hpp"

namespace ratelab::segments {

enum class RaterKind { synthetic, human };

std::string_view to_string(RaterKind kind);
RaterKind parse_rater_kind(std::string_view name);

struct RatingExample {
  Segment segment;
  int rating = 0;
  /// One-hot target distribution over the n rating classes.
  std::vector<double> onehot_target;
  RaterKind rater = RaterKind::synthetic;
  std::string rater_id;
};

/// Throws std::out_of_range if rating is not in [0, n_classes).
RatingExample make_rating_example(Segment segment, int rating, int n_classes,
                                  RaterKind rater, std::string rater_id = {});

/// The rated set. Class counts track every insertion; segment ids are
/// unique. Not synchronized: concurrent writers must go through one owner
/// (see rating_service).
class RatingDataset {
 public:
  static constexpr int kMinClasses = 2;
  static constexpr int kMaxClasses = 6;

  explicit RatingDataset(int n_classes);

  int n_classes() const noexcept { return n_classes_; }
  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }
  const std::vector<RatingExample>& examples() const noexcept {
    return examples_;
  }
  const std::vector<std::size_t>& class_counts() const noexcept {
    return counts_;
  }
  bool contains(std::uint64_t segment_id) const {
    return ids_.count(segment_id) != 0;
  }

  /// Throws std::invalid_argument on a duplicate segment id, a class-count
  /// mismatch or an out-of-range rating.
  void add(RatingExample example);

 private:
  int n_classes_;
  std::vector<RatingExample> examples_;
  std::vector<std::size_t> counts_;
  std::unordered_set<std::uint64_t> ids_;
};

/// Bucket index of `value` among strictly increasing `boundaries` (n - 1
/// interior edges). Buckets are half-open [lo, hi): a value equal to an edge
/// belongs to the upper class. Values below/above every edge fall into class
/// 0 / n - 1.
int synthetic_rate(double value, std::span<const double> boundaries);
int synthetic_rate(const Segment& segment, std::span<const double> boundaries);

/// n equal-width buckets over [0, top_fraction * length * max_step_reward];
/// returns the n - 1 interior edges.
std::vector<double> default_synthetic_boundaries(const envs::EnvSpec& spec,
                                                 int n_classes, int length,
                                                 double top_fraction = 0.8);

/// Throws std::invalid_argument unless the edges are strictly increasing.
void validate_synthetic_boundaries(std::span<const double> boundaries);

}  // namespace ratelab::segments
