#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <vector>

#include "json.hpp"

namespace ratelab::orchestrator {

/// Receives metric events. Events never carry wall-clock time, so a run's
/// stream depends only on its config and seed.
class MetricsSink {
 public:
  virtual ~MetricsSink() = default;
  /// Thread-safe.
  virtual void emit(const nlohmann::json& event) = 0;
};

class NullMetricsSink final : public MetricsSink {
 public:
  void emit(const nlohmann::json&) override {}
};

/// One compact JSON object per line, flushed per event.
class JsonlMetricsSink final : public MetricsSink {
 public:
  explicit JsonlMetricsSink(const std::filesystem::path& path);
  void emit(const nlohmann::json& event) override;

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

class MemoryMetricsSink final : public MetricsSink {
 public:
  void emit(const nlohmann::json& event) override;
  std::vector<nlohmann::json> events() const;

 private:
  mutable std::mutex mutex_;
  std::vector<nlohmann::json> events_;
};

/// Forwards to both sinks.
class TeeMetricsSink final : public MetricsSink {
 public:
  TeeMetricsSink(MetricsSink& a, MetricsSink& b) : a_(a), b_(b) {}
  void emit(const nlohmann::json& event) override {
    a_.emit(event);
    b_.emit(event);
  }

 private:
  MetricsSink& a_;
  MetricsSink& b_;
};

}  // namespace ratelab::orchestrator
