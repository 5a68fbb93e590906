#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "ratelab/segments/rating.hpp"

namespace ratelab::rating {

enum class Phase { collecting, training, policy_learning, finished };

std::string_view to_string(Phase phase);

/// Seconds; only differences matter for leases.
using Clock = std::function<double()>;

/// Wall-clock seconds since the Unix epoch.
double system_seconds();

struct PendingSegment {
  std::uint64_t segment_id = 0;
  std::string env;
  /// One state vector per step.
  Eigen::MatrixXd states;
  int length = 0;
  int n_classes = 0;
  double issued_at = 0.0;
};

nlohmann::json to_json(const PendingSegment& pending);

struct ServiceStatus {
  std::size_t pending = 0;
  std::size_t rated = 0;
  std::size_t required = 0;
  Phase phase = Phase::collecting;
};

nlohmann::json to_json(const ServiceStatus& status);

enum class SubmitOutcome {
  accepted,
  out_of_range,
  unknown_segment,
  duplicate,
  budget_reached,
  storage_failed,
};

struct SubmitResult {
  SubmitOutcome outcome = SubmitOutcome::accepted;
  std::string message;

  bool accepted() const noexcept { return outcome == SubmitOutcome::accepted; }
  /// 200, 400 (range), 404 (unknown), 409 (duplicate or budget), 500.
  int http_status() const noexcept;
};

struct RatingServiceOptions {
  int n_classes = 4;
  std::size_t required = 500;
  double lease_seconds = 120.0;
  /// Accepted ratings are appended here before submit() returns. Empty
  /// keeps the dataset in memory only.
  std::filesystem::path jsonl_path;
  Clock clock = system_seconds;
};

/// Queue of segments awaiting human ratings.
///
/// All state sits behind one mutex, so accepted ratings are serialized
/// through a single writer and reach the JSONL file before the ack.
class RatingService {
 public:
  /// Ratings already present in jsonl_path are loaded, so an interrupted
  /// collection resumes where it stopped.
  explicit RatingService(RatingServiceOptions options);

  /// Queues a segment. Segments whose id is already rated are ignored.
  /// Returns false when ignored.
  bool add_pending(segments::Segment segment);

  /// Oldest segment without an active lease; starts its lease.
  std::optional<PendingSegment> next_segment();

  SubmitResult submit(std::uint64_t segment_id, int rating, std::string rater_id);

  ServiceStatus status() const;
  void set_phase(Phase phase);
  std::size_t rated() const;
  segments::RatingDataset dataset() const;

  /// Blocks until `count` ratings exist or the timeout (real time) passes.
  bool wait_for_ratings(std::size_t count, std::chrono::milliseconds timeout) const;

  const RatingServiceOptions& options() const noexcept { return options_; }

 private:
  struct Entry {
    segments::Segment segment;
    std::optional<double> lease_start;
  };

  RatingServiceOptions options_;
  mutable std::mutex mutex_;
  mutable std::condition_variable rated_cv_;
  std::map<std::uint64_t, Entry> pending_;
  segments::RatingDataset dataset_;
  std::ofstream jsonl_;
  Phase phase_ = Phase::collecting;
};

}  // namespace ratelab::rating
