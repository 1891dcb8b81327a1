#include "f2v/model/predictor.hpp"

#include <cmath>
#include <string>

#include "f2v/core/errors.hpp"
#include "f2v/core/rng.hpp"

namespace f2v {
namespace {

void require_size(int h, int w, int size, const char* what) {
  if (h != size || w != size) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(size) + "x" + std::to_string(size) +
                     ", got " + std::to_string(w) + "x" + std::to_string(h));
  }
}

PredictionOutput run(const Model& model, const SemanticFrame& initial, const DirectionMap& direction,
                     const FlowField& flow, const nn::Tensor<float>* noise) {
  const ModelInputs in = pack_inputs(model.config(), {FrameCue{&initial, &flow, &direction}});
  const ForwardState<float> st = model.forward(in.sm, in.of, noise);
  PredictionOutput out;
  out.frames = unpack_videos(st.output, model.config().horizon).front();
  out.latent.channels = st.latent.mu.c;
  out.latent.height = st.latent.mu.h;
  out.latent.width = st.latent.mu.w;
  out.latent.mu = st.latent.mu.data;
  out.latent.logvar = st.latent.logvar.data;
  out.sampled_z = st.z.data;
  return out;
}

}  // namespace

ModelInputs pack_inputs(const ModelConfig& config, const std::vector<FrameCue>& cues) {
  const int s = config.image_size;
  const int n = static_cast<int>(cues.size());
  ModelInputs in{nn::Tensor<float>(config.sm_in_channels(), n, s, s), nn::Tensor<float>(config.of_in_channels(), n, s, s)};
  const std::size_t plane = static_cast<std::size_t>(s) * s;
  for (int b = 0; b < n; ++b) {
    const FrameCue& cue = cues[static_cast<std::size_t>(b)];
    require_size(cue.initial->height(), cue.initial->width(), s, "initial frame");
    require_size(cue.direction->height, cue.direction->width, s, "direction map");
    require_size(cue.flow->height, cue.flow->width, s, "flow field");
    if (cue.initial->image.channels != 3) throw ShapeError("initial frame must have 3 channels");
    for (int c = 0; c < 3; ++c) {
      std::copy_n(cue.initial->image.data.begin() + static_cast<std::ptrdiff_t>(c * plane), plane,
                  in.sm.channel(c) + b * plane);
    }
    std::copy_n(cue.direction->c0.begin(), plane, in.sm.channel(3) + b * plane);
    std::copy_n(cue.direction->c1.begin(), plane, in.sm.channel(4) + b * plane);
    if (config.flow_input == FlowInput::uv) {
      std::copy_n(cue.flow->u.begin(), plane, in.of.channel(0) + b * plane);
      std::copy_n(cue.flow->v.begin(), plane, in.of.channel(1) + b * plane);
    } else {
      float* dst = in.of.channel(0) + b * plane;
      for (std::size_t i = 0; i < plane; ++i) dst[i] = std::hypot(cue.flow->u[i], cue.flow->v[i]);
    }
  }
  return in;
}

nn::Tensor<float> pack_targets(const ModelConfig& config, const std::vector<const VideoTensor*>& targets) {
  const int s = config.image_size;
  const int n = static_cast<int>(targets.size());
  nn::Tensor<float> out(config.output_channels(), n, s, s);
  const std::size_t plane = static_cast<std::size_t>(s) * s;
  for (int b = 0; b < n; ++b) {
    const VideoTensor& v = *targets[static_cast<std::size_t>(b)];
    if (v.num_frames() != config.horizon) {
      throw ShapeError("target has " + std::to_string(v.num_frames()) + " frames, expected " +
                       std::to_string(config.horizon));
    }
    for (int k = 0; k < config.horizon; ++k) {
      const Image& f = v.frames[static_cast<std::size_t>(k)];
      require_size(f.height, f.width, s, "target frame");
      for (int c = 0; c < 3; ++c) {
        std::copy_n(f.data.begin() + static_cast<std::ptrdiff_t>(c * plane), plane,
                    out.channel(3 * k + c) + b * plane);
      }
    }
  }
  return out;
}

std::vector<VideoTensor> unpack_videos(const nn::Tensor<float>& output, int horizon) {
  if (output.c != 3 * horizon) throw ShapeError("output has " + std::to_string(output.c) + " channels");
  const std::size_t plane = output.image_size();
  std::vector<VideoTensor> videos(static_cast<std::size_t>(output.n));
  for (int b = 0; b < output.n; ++b) {
    for (int k = 0; k < horizon; ++k) {
      Image img(3, output.h, output.w);
      for (int c = 0; c < 3; ++c) {
        const float* src = output.channel(3 * k + c) + b * plane;
        std::copy_n(src, plane, img.data.begin() + static_cast<std::ptrdiff_t>(c * plane));
      }
      videos[static_cast<std::size_t>(b)].frames.push_back(std::move(img));
    }
  }
  return videos;
}

PredictionOutput predict(const Model& model, const SemanticFrame& initial, const DirectionMap& direction,
                         const FlowField& flow, SampleMode mode, std::uint64_t seed) {
  if (mode == SampleMode::mean) return run(model, initial, direction, flow, nullptr);
  const ModelConfig& cfg = model.config();
  nn::Tensor<float> noise(cfg.latent_channels, 1, cfg.latent_spatial, cfg.latent_spatial);
  Rng rng(seed);
  rng.fill_normal(noise.data);
  return run(model, initial, direction, flow, &noise);
}

PredictionOutput predict_with_noise(const Model& model, const SemanticFrame& initial, const DirectionMap& direction,
                                    const FlowField& flow, const std::vector<float>& noise) {
  const ModelConfig& cfg = model.config();
  nn::Tensor<float> t(cfg.latent_channels, 1, cfg.latent_spatial, cfg.latent_spatial);
  if (noise.size() != t.size()) throw ShapeError("noise must have " + std::to_string(t.size()) + " values");
  t.data = noise;
  return run(model, initial, direction, flow, &t);
}

}  // namespace f2v
