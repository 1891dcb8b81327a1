#include "f2v/scorer/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "f2v/core/errors.hpp"
#include "f2v/ingest/image_io.hpp"
#include "f2v/ingest/samples.hpp"
#include "f2v/nn/fp_env.hpp"

namespace f2v {

const char* attribution_name(Attribution a) {
  return a == Attribution::window_end ? "window_end" : "initial_frame";
}

Attribution parse_attribution(const std::string& name) {
  if (name == "window_end") return Attribution::window_end;
  if (name == "initial_frame") return Attribution::initial_frame;
  throw ConfigError("unknown attribution '" + name + "' (window_end, initial_frame)");
}

const char* smooth_order_name(SmoothOrder o) {
  return o == SmoothOrder::smooth_then_normalize ? "smooth_then_normalize" : "normalize_then_smooth";
}

SmoothOrder parse_smooth_order(const std::string& name) {
  if (name == "smooth_then_normalize") return SmoothOrder::smooth_then_normalize;
  if (name == "normalize_then_smooth") return SmoothOrder::normalize_then_smooth;
  throw ConfigError("unknown smoothing order '" + name + "'");
}

void ScoreConfig::validate(int horizon) const {
  if (timestep < 0 || timestep > horizon) {
    throw ConfigError("timestep must be 0 (all) or in 1.." + std::to_string(horizon) + ", got " + std::to_string(timestep));
  }
  if (sg_window < 1 || sg_window % 2 == 0) throw ConfigError("sg_window must be a positive odd integer");
  if (sg_order < 0 || sg_order >= sg_window) throw ConfigError("sg_order must be in [0, sg_window)");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

Image squared_error_map(const Image& predicted, const Image& target) {
  if (predicted.channels != target.channels || predicted.height != target.height || predicted.width != target.width) {
    throw ShapeError("prediction and target frames differ in shape");
  }
  Image map(1, target.height, target.width);
  const std::size_t plane = target.plane_size();
  for (int c = 0; c < target.channels; ++c) {
    const float* p = predicted.data.data() + c * plane;
    const float* q = target.data.data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      const float d = p[i] - q[i];
      map.data[i] += d * d;
    }
  }
  const float inv = 1.0f / static_cast<float>(target.channels);
  for (float& v : map.data) v *= inv;
  return map;
}

double mean_value(const Image& map) {
  double acc = 0.0;
  for (float v : map.data) acc += v;
  return map.data.empty() ? 0.0 : acc / static_cast<double>(map.data.size());
}

double aggregate_row(const std::vector<double>& errors, int timestep) {
  if (timestep > 0) return errors.at(static_cast<std::size_t>(timestep - 1));
  double acc = 0.0;
  for (double e : errors) acc += e;
  return acc / static_cast<double>(errors.size());
}

std::vector<double> postprocess(const std::vector<double>& raw, const ScoreConfig& cfg, std::vector<double>* smoothed) {
  std::vector<double> s;
  std::vector<double> out;
  if (cfg.order == SmoothOrder::smooth_then_normalize) {
    s = smooth_scores(raw, cfg.sg_window, cfg.sg_order);
    out = normalize_scores(s);
  } else {
    s = smooth_scores(normalize_scores(raw), cfg.sg_window, cfg.sg_order);
    out = s;
    for (double& v : out) v = std::clamp(v, 0.0, 1.0);
  }
  if (smoothed) *smoothed = std::move(s);
  return out;
}

void finalize_series(AnomalyScoreSeries& s, const ScoreConfig& cfg) {
  s.raw.clear();
  for (const auto& row : s.per_timestep_error) s.raw.push_back(aggregate_row(row, cfg.timestep));
  if (s.raw.empty()) {
    s.smoothed.clear();
    s.normalized.clear();
    return;
  }
  s.normalized = postprocess(s.raw, cfg, &s.smoothed);
}

AnomalyScoreSeries assemble_series(const std::string& clip_id, int num_frames, int horizon, const std::vector<int>& windows,
                                   const std::vector<std::vector<double>>& errors, const ScoreConfig& cfg) {
  if (windows.empty() || windows.size() != errors.size()) throw InvalidInputError("no scored windows for " + clip_id);
  AnomalyScoreSeries s;
  s.clip_id = clip_id;
  s.horizon = horizon;
  const int shift = cfg.attribution == Attribution::window_end ? horizon : 0;
  for (int f = 0; f < num_frames; ++f) {
    // nearest window whose attributed frame is closest to f
    const int want = f - shift;
    std::size_t best = 0;
    for (std::size_t i = 1; i < windows.size(); ++i) {
      if (std::abs(windows[i] - want) < std::abs(windows[best] - want)) best = i;
    }
    s.frame_index.push_back(f);
    s.window.push_back(windows[best]);
    s.per_timestep_error.push_back(errors[best]);
  }
  finalize_series(s, cfg);
  return s;
}

ClipScore score_clip(const Model& model, const Clip& clip, const ScoreConfig& cfg) {
  const ModelConfig& mc = model.config();
  cfg.validate(mc.horizon);
  const nn::FlushDenormals ftz;
  ClipScore result;
  result.series.clip_id = clip.clip_id;
  result.series.horizon = mc.horizon;
  const std::vector<int> windows = initial_frame_indices(clip.num_frames(), mc.horizon);
  if (windows.empty()) {
    result.warning = "clip " + clip.clip_id + " has " + std::to_string(clip.num_frames()) +
                     " frames, fewer than horizon + 2; skipped";
    return result;
  }
  if (clip.frames.front().height() != mc.image_size || clip.frames.front().width() != mc.image_size) {
    throw ShapeError("clip " + clip.clip_id + " is " + std::to_string(clip.frames.front().height()) + "x" +
                     std::to_string(clip.frames.front().width()) + " but the model expects " +
                     std::to_string(mc.image_size) + "x" + std::to_string(mc.image_size));
  }

  std::vector<std::vector<double>> errors;
  const int size = mc.image_size;
  const std::size_t plane = static_cast<std::size_t>(size) * size;
  for (std::size_t start = 0; start < windows.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
    const std::size_t end = std::min(windows.size(), start + static_cast<std::size_t>(cfg.batch_size));
    std::vector<DirectionMap> directions;
    for (std::size_t i = start; i < end; ++i) {
      directions.push_back(compute_direction_map(clip.flows[static_cast<std::size_t>(windows[i] - 1)], cfg.eps_motion));
    }
    std::vector<FrameCue> cues;
    for (std::size_t i = start; i < end; ++i) {
      const auto t = static_cast<std::size_t>(windows[i]);
      cues.push_back({&clip.frames[t], &clip.flows[t - 1], &directions[i - start]});
    }
    const ModelInputs in = pack_inputs(mc, cues);
    const auto st = model.forward(in.sm, in.of, nullptr);
    const int batch = static_cast<int>(end - start);
    for (int b = 0; b < batch; ++b) {
      const int t = windows[start + static_cast<std::size_t>(b)];
      std::vector<double> row;
      for (int k = 0; k < mc.horizon; ++k) {
        Image pred(3, size, size);
        for (int c = 0; c < 3; ++c) {
          const float* src = st.output.data.data() + (static_cast<std::size_t>(3 * k + c) * batch + b) * plane;
          std::copy(src, src + plane, pred.data.begin() + static_cast<std::ptrdiff_t>(c * plane));
        }
        Image map = squared_error_map(pred, clip.frames[static_cast<std::size_t>(t + k + 1)].image);
        row.push_back(mean_value(map));
        if (cfg.keep_maps) result.maps.push_back({t, k + 1, std::move(map)});
      }
      errors.push_back(std::move(row));
    }
  }
  result.series = assemble_series(clip.clip_id, clip.num_frames(), mc.horizon, windows, errors, cfg);
  return result;
}

void write_anomaly_maps(const std::filesystem::path& dir, const std::vector<AnomalyMap>& maps) {
  std::filesystem::create_directories(dir);
  for (const auto& m : maps) {
    std::vector<std::uint8_t> px(m.error.data.size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = to_byte(m.error.data[i]);
    char name[64];
    std::snprintf(name, sizeof name, "%06d_ts%02d.png", m.initial_frame, m.timestep);
    write_png_gray(dir / name, m.error.height, m.error.width, px);
  }
}

}  // namespace f2v
