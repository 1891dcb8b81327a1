#pragma once

#include <filesystem>
#include <vector>

#include "f2v/evaluator/auc.hpp"
#include "f2v/scorer/scorer.hpp"

namespace f2v {

void write_roc_svg(const std::filesystem::path& path, const std::vector<RocPoint>& roc, double auc);

/// Normalized score over frame index with anomalous frames shaded.
void write_timeline_svg(const std::filesystem::path& path, const AnomalyScoreSeries& series,
                        const std::vector<int>& labels);

/// Bar chart of AUC per timestep plus the aggregate.
void write_timestep_svg(const std::filesystem::path& path, const std::vector<double>& auc_per_timestep, double auc_all);

}  // namespace f2v
