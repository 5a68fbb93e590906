#include "ratelab/rating_service/rating_service.hpp"

#include <stdexcept>

#include "ratelab/segments/dataset_io.hpp"

namespace ratelab::rating {

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::collecting: return "collecting";
    case Phase::training: return "training";
    case Phase::policy_learning: return "policy_learning";
    case Phase::finished: return "finished";
  }
  return "unknown";
}

double system_seconds() {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

nlohmann::json to_json(const PendingSegment& pending) {
  return {{"segment_id", pending.segment_id},
          {"env", pending.env},
          {"states", segments::matrix_to_json(pending.states)},
          {"length", pending.length},
          {"n_classes", pending.n_classes},
          {"issued_at", pending.issued_at}};
}

nlohmann::json to_json(const ServiceStatus& status) {
  return {{"pending", status.pending},
          {"rated", status.rated},
          {"required", status.required},
          {"phase", std::string(to_string(status.phase))}};
}

int SubmitResult::http_status() const noexcept {
  switch (outcome) {
    case SubmitOutcome::accepted: return 200;
    case SubmitOutcome::out_of_range: return 400;
    case SubmitOutcome::unknown_segment: return 404;
    case SubmitOutcome::duplicate:
    case SubmitOutcome::budget_reached: return 409;
    case SubmitOutcome::storage_failed: return 500;
  }
  return 500;
}

RatingService::RatingService(RatingServiceOptions options)
    : options_(std::move(options)), dataset_(options_.n_classes) {
  if (options_.required == 0) throw std::invalid_argument("rating budget must be positive");
  if (!options_.clock) options_.clock = system_seconds;
  if (!options_.jsonl_path.empty()) {
    if (std::filesystem::exists(options_.jsonl_path)) {
      dataset_ = segments::load_jsonl(options_.jsonl_path, options_.n_classes);
    }
    jsonl_.open(options_.jsonl_path, std::ios::app);
    if (!jsonl_) {
      throw std::runtime_error("cannot open " + options_.jsonl_path.string());
    }
  }
  if (dataset_.size() >= options_.required) phase_ = Phase::training;
}

bool RatingService::add_pending(segments::Segment segment) {
  std::lock_guard lock(mutex_);
  const auto id = segment.segment_id;
  if (dataset_.contains(id) || pending_.count(id) != 0) return false;
  pending_.emplace(id, Entry{std::move(segment), std::nullopt});
  return true;
}

std::optional<PendingSegment> RatingService::next_segment() {
  std::lock_guard lock(mutex_);
  const double now = options_.clock();
  for (auto& [id, entry] : pending_) {
    if (entry.lease_start && now - *entry.lease_start < options_.lease_seconds) continue;
    entry.lease_start = now;
    PendingSegment out;
    out.segment_id = id;
    out.env = entry.segment.env_name;
    out.states = entry.segment.states;
    out.length = entry.segment.length();
    out.n_classes = options_.n_classes;
    out.issued_at = now;
    return out;
  }
  return std::nullopt;
}

SubmitResult RatingService::submit(std::uint64_t segment_id, int rating,
                                   std::string rater_id) {
  std::lock_guard lock(mutex_);
  const std::string id = std::to_string(segment_id);
  if (dataset_.contains(segment_id)) {
    return {SubmitOutcome::duplicate, "segment " + id + " is already rated"};
  }
  const auto it = pending_.find(segment_id);
  if (it == pending_.end()) {
    return {SubmitOutcome::unknown_segment, "segment " + id + " is not pending"};
  }
  if (rating < 0 || rating >= options_.n_classes) {
    return {SubmitOutcome::out_of_range,
            "rating " + std::to_string(rating) + " outside [0, " +
                std::to_string(options_.n_classes - 1) + "]"};
  }
  if (dataset_.size() >= options_.required) {
    return {SubmitOutcome::budget_reached, "rating budget of " +
                                               std::to_string(options_.required) +
                                               " already reached"};
  }

  auto example = segments::make_rating_example(it->second.segment, rating,
                                               options_.n_classes,
                                               segments::RaterKind::human,
                                               std::move(rater_id));
  if (jsonl_.is_open()) {
    segments::append_jsonl(jsonl_, example, options_.n_classes);
    if (!jsonl_) {
      return {SubmitOutcome::storage_failed, "could not append to the dataset file"};
    }
  }
  dataset_.add(std::move(example));
  pending_.erase(it);
  if (dataset_.size() >= options_.required && phase_ == Phase::collecting) {
    phase_ = Phase::training;
  }
  rated_cv_.notify_all();
  return {SubmitOutcome::accepted, "ok"};
}

ServiceStatus RatingService::status() const {
  std::lock_guard lock(mutex_);
  return {pending_.size(), dataset_.size(), options_.required, phase_};
}

void RatingService::set_phase(Phase phase) {
  std::lock_guard lock(mutex_);
  phase_ = phase;
}

std::size_t RatingService::rated() const {
  std::lock_guard lock(mutex_);
  return dataset_.size();
}

segments::RatingDataset RatingService::dataset() const {
  std::lock_guard lock(mutex_);
  return dataset_;
}

bool RatingService::wait_for_ratings(std::size_t count,
                                     std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  return rated_cv_.wait_for(lock, timeout, [&] { return dataset_.size() >= count; });
}

}  // namespace ratelab::rating
