#pragma once

#include <filesystem>
#include <vector>

#include "f2v/scorer/scorer.hpp"

namespace f2v {

/// clip_id,frame_index,raw,smoothed,normalized,ts_1..ts_H
void write_scores_csv(const std::filesystem::path& path, const std::vector<AnomalyScoreSeries>& series);
/// Clips come back in file order; `window` is not stored and stays empty.
std::vector<AnomalyScoreSeries> read_scores_csv(const std::filesystem::path& path);

}  // namespace f2v
