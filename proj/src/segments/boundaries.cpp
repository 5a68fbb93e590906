#include "ratelab/segments/boundaries.hpp"

#include <algorithm>
#include <stdexcept>

namespace ratelab::segments {

RatingBoundaries uniform_boundaries(int n_classes) {
  if (n_classes < 1) throw std::invalid_argument("need at least one class");
  RatingBoundaries b;
  for (int i = 0; i <= n_classes; ++i) {
    b.edges.push_back(static_cast<double>(i) / n_classes);
  }
  b.edges.back() = 1.0;
  return b;
}

void validate(const RatingBoundaries& boundaries) {
  const auto& e = boundaries.edges;
  if (e.size() < 2) throw std::invalid_argument("boundaries need two edges");
  if (e.front() != 0.0 || e.back() != 1.0) {
    throw std::invalid_argument("boundaries must start at 0 and end at 1");
  }
  for (std::size_t i = 1; i < e.size(); ++i) {
    if (e[i] < e[i - 1]) {
      throw std::invalid_argument("boundaries must be non-decreasing");
    }
  }
}

RatingBoundaries estimate_boundaries(std::span<const int> labels,
                                     std::span<const double> normalized_returns,
                                     int n_classes) {
  if (labels.empty()) {
    throw std::invalid_argument("cannot estimate boundaries from an empty dataset");
  }
  if (labels.size() != normalized_returns.size()) {
    throw std::invalid_argument("labels and returns differ in length");
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (int label : labels) {
    if (label < 0 || label >= n_classes) {
      throw std::invalid_argument("label out of range");
    }
    ++counts[static_cast<std::size_t>(label)];
  }
  std::vector<double> sorted(normalized_returns.begin(), normalized_returns.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t total = sorted.size();

  RatingBoundaries b;
  b.edges.assign(static_cast<std::size_t>(n_classes) + 1, 0.0);
  b.edges.back() = 1.0;
  std::size_t below = 0;
  for (int i = 1; i < n_classes; ++i) {
    below += counts[static_cast<std::size_t>(i - 1)];
    double edge;
    if (below == 0) {
      edge = 0.0;
    } else if (below == total) {
      edge = 1.0;
    } else {
      edge = 0.5 * (sorted[below - 1] + sorted[below]);
    }
    b.edges[static_cast<std::size_t>(i)] = std::clamp(edge, 0.0, 1.0);
  }
  const auto populated =
      std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
  b.degenerate = populated < 2;
  return b;
}

RatingBoundaries estimate_boundaries(const RatingDataset& dataset,
                                     std::span<const double> normalized_returns) {
  std::vector<int> labels;
  labels.reserve(dataset.size());
  for (const auto& ex : dataset.examples()) labels.push_back(ex.rating);
  return estimate_boundaries(labels, normalized_returns, dataset.n_classes());
}

int bucket_of(double normalized_return, const RatingBoundaries& boundaries) {
  const auto& e = boundaries.edges;
  const auto interior_begin = e.begin() + 1;
  const auto interior_end = e.end() - 1;
  return static_cast<int>(
      std::upper_bound(interior_begin, interior_end, normalized_return) -
      interior_begin);
}

}  // namespace ratelab::segments
