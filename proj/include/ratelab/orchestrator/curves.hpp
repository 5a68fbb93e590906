#pragma once

#include <filesystem>
#include <vector>

#include "ratelab/orchestrator/matrix.hpp"

namespace ratelab::orchestrator {

/// Writes curves_<env>.csv per environment into `out_dir` with columns
/// step,variant,n_classes,mean,stderr. Numbers use %.17g so they parse
/// back exactly. Returns the written paths in env order.
std::vector<std::filesystem::path> emit_curves(const std::vector<SummaryRow>& summary,
                                               const std::filesystem::path& out_dir);

/// Rows of one curves file; env is taken from the file name.
std::vector<SummaryRow> read_curves_csv(const std::filesystem::path& path);

}  // namespace ratelab::orchestrator
