#include "ratelab/orchestrator/metrics.hpp"

#include <stdexcept>

namespace ratelab::orchestrator {

JsonlMetricsSink::JsonlMetricsSink(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::app);
  if (!out_) throw std::runtime_error("cannot open metrics file " + path.string());
}

void JsonlMetricsSink::emit(const nlohmann::json& event) {
  const std::string line = event.dump();
  std::lock_guard lock(mutex_);
  out_ << line << '\n';
  out_.flush();
}

void MemoryMetricsSink::emit(const nlohmann::json& event) {
  std::lock_guard lock(mutex_);
  events_.push_back(event);
}

std::vector<nlohmann::json> MemoryMetricsSink::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

}  // namespace ratelab::orchestrator
