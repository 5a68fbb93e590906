#pragma once

#include <span>
#include <vector>

#include "ratelab/segments/rating.hpp"

namespace ratelab::segments {

/// Edges R_0 <= R_1 <= ... <= R_n on the normalized-return scale with
/// R_0 = 0 and R_n = 1. Class i covers [R_i, R_{i+1}).
struct RatingBoundaries {
  std::vector<double> edges;
  /// Set when fewer than two classes are populated, so every interior edge
  /// collapsed onto 0 or 1.
  bool degenerate = false;

  int n_classes() const noexcept {
    return static_cast<int>(edges.size()) - 1;
  }
};

/// n equal-width classes over [0, 1].
RatingBoundaries uniform_boundaries(int n_classes);

/// Throws std::invalid_argument unless the edges run from 0 to 1 without
/// decreasing.
void validate(const RatingBoundaries& boundaries);

/// Fits edges so that bucketing `normalized_returns` reproduces the label
/// proportions: with c_i the number of labels below class i, R_i is the
/// midpoint of the c_i-th and (c_i + 1)-th smallest returns (0 when c_i = 0,
/// 1 when c_i = N). Throws std::invalid_argument when empty or when the
/// spans differ in length.
RatingBoundaries estimate_boundaries(std::span<const int> labels,
                                     std::span<const double> normalized_returns,
                                     int n_classes);

/// Same, with labels taken from the dataset (returns indexed like its
/// examples).
RatingBoundaries estimate_boundaries(const RatingDataset& dataset,
                                     std::span<const double> normalized_returns);

/// Class whose half-open bucket contains `normalized_return`.
int bucket_of(double normalized_return, const RatingBoundaries& boundaries);

}  // namespace ratelab::segments
