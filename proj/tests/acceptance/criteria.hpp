#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace ratelab::acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Settings {
  /// Holds the acceptance matrix configs.
  std::filesystem::path config_dir;
  /// Matrix results are stored here, keyed by the config set.
  std::filesystem::path cache_dir;
  int parallelism = 1;
};

struct Criterion {
  std::string name;
  std::function<Outcome(const Settings&)> run;
};

std::vector<Criterion> property_criteria();
std::vector<Criterion> matrix_criteria();

}  // namespace ratelab::acceptance
