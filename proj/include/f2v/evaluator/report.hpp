#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "f2v/evaluator/auc.hpp"
#include "f2v/scorer/scorer.hpp"

namespace f2v {

struct EvalConfig {
  int sg_window = kDefaultSgWindow;
  int sg_order = kDefaultSgOrder;
  SmoothOrder order = SmoothOrder::smooth_then_normalize;
  bool per_clip_average = false;
};

struct GroupReport {
  double auc_all = 0.0;
  std::vector<double> auc_per_timestep;
  int num_frames = 0;
  int num_anomalous = 0;
};

struct EvalReport {
  double auc_all = 0.0;
  std::vector<double> auc_per_timestep;
  int num_frames = 0;
  int num_anomalous = 0;
  std::vector<RocPoint> roc_points;
  std::optional<double> auc_per_clip_mean;
  // keyed by clip_id with its trailing _NNNN removed; groups lacking either class are left out
  std::map<std::string, GroupReport> groups;
};

struct LabelledSeries {
  const AnomalyScoreSeries* series = nullptr;
  const std::vector<int>* labels = nullptr;
};

/// Normalized score of one timestep column, per clip, via the scorer's postprocessing.
std::vector<double> timestep_scores(const AnomalyScoreSeries& s, int timestep, const EvalConfig& cfg);

/// AUC of the score column and of each timestep over the concatenated clips.
GroupReport evaluate_group(const std::vector<LabelledSeries>& clips, const EvalConfig& cfg,
                           std::vector<RocPoint>* roc = nullptr);

/// Frame-level report over all clips plus per-group reports and the "All" column.
EvalReport per_timestep_table(const std::vector<LabelledSeries>& clips, const EvalConfig& cfg);

std::string group_of(const std::string& clip_id);

/// Reads root/test/<clip_id>/labels.csv for each series.
std::vector<std::vector<int>> load_labels_for(const std::filesystem::path& dataset_root,
                                              const std::vector<AnomalyScoreSeries>& series);

void write_report_json(const std::filesystem::path& path, const EvalReport& report, const EvalConfig& cfg);
/// One row per scope (all, then groups): ts_1..ts_H,All.
void write_report_csv(const std::filesystem::path& path, const EvalReport& report);

}  // namespace f2v
