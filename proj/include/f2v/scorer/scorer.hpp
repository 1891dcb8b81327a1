#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "f2v/core/flow.hpp"
#include "f2v/ingest/dataset.hpp"
#include "f2v/model/predictor.hpp"
#include "f2v/scorer/savgol.hpp"

namespace f2v {

// Which frame a prediction window's score is reported at.
enum class Attribution {
  window_end,     // frame t + horizon, the last predicted frame
  initial_frame,  // frame t
};
enum class SmoothOrder { smooth_then_normalize, normalize_then_smooth };

const char* attribution_name(Attribution a);
Attribution parse_attribution(const std::string& name);
const char* smooth_order_name(SmoothOrder o);
SmoothOrder parse_smooth_order(const std::string& name);

struct ScoreConfig {
  int timestep = 0;  // 0 = mean over all timesteps, else 1..horizon
  int sg_window = kDefaultSgWindow;
  int sg_order = kDefaultSgOrder;
  SmoothOrder order = SmoothOrder::smooth_then_normalize;
  Attribution attribution = Attribution::window_end;
  float eps_motion = kDefaultMotionEpsilon;
  int batch_size = 16;
  bool keep_maps = false;

  void validate(int horizon) const;
};

struct AnomalyScoreSeries {
  std::string clip_id;
  int horizon = 0;
  std::vector<int> frame_index;
  std::vector<int> window;                  // initial frame of the window behind each row
  std::vector<std::vector<double>> per_timestep_error;  // [row][k]
  std::vector<double> raw;
  std::vector<double> smoothed;
  std::vector<double> normalized;

  std::size_t size() const { return frame_index.size(); }
};

// Per-pixel squared error (mean over color channels) for one window and timestep.
struct AnomalyMap {
  int initial_frame = 0;
  int timestep = 0;  // 1-based
  Image error;       // 1 channel
};

struct ClipScore {
  AnomalyScoreSeries series;
  std::vector<AnomalyMap> maps;
  std::optional<std::string> warning;  // set when the clip was skipped
};

/// Squared error averaged over color channels, one value per pixel.
Image squared_error_map(const Image& predicted, const Image& target);
double mean_value(const Image& map);

/// Raw per-frame score from a row of per-timestep errors.
double aggregate_row(const std::vector<double>& errors, int timestep);

/// Smoothing and Eq. 7 normalization in the configured order.
std::vector<double> postprocess(const std::vector<double>& raw, const ScoreConfig& cfg, std::vector<double>* smoothed = nullptr);

/// Fills raw/smoothed/normalized from per_timestep_error.
void finalize_series(AnomalyScoreSeries& s, const ScoreConfig& cfg);

/// Builds a full-length series from per-window errors. `windows[i]` produced
/// errors[i]; frames without a window get the nearest one.
AnomalyScoreSeries assemble_series(const std::string& clip_id, int num_frames, int horizon, const std::vector<int>& windows,
                                   const std::vector<std::vector<double>>& errors, const ScoreConfig& cfg);

/// Mean-mode prediction over every window of `clip`.
ClipScore score_clip(const Model& model, const Clip& clip, const ScoreConfig& cfg);

void write_anomaly_maps(const std::filesystem::path& dir, const std::vector<AnomalyMap>& maps);

}  // namespace f2v
