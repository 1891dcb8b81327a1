#pragma once

#include <cstdint>
#include <vector>

#include "f2v/core/types.hpp"
#include "f2v/model/network.hpp"

namespace f2v {

using Model = FrameToVideoNet<float>;

struct LatentDistribution {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> mu;
  std::vector<float> logvar;
};

struct PredictionOutput {
  VideoTensor frames;
  LatentDistribution latent;
  std::vector<float> sampled_z;
};

enum class SampleMode { sample, mean };

// One model input: the initial frame with its motion cues.
struct FrameCue {
  const SemanticFrame* initial = nullptr;
  const FlowField* flow = nullptr;
  const DirectionMap* direction = nullptr;
};

struct ModelInputs {
  nn::Tensor<float> sm;  // 5 x N x S x S
  nn::Tensor<float> of;  // of_in_channels x N x S x S
};

ModelInputs pack_inputs(const ModelConfig& config, const std::vector<FrameCue>& cues);

/// Stacks target videos into a (3 * horizon) x N x S x S tensor.
nn::Tensor<float> pack_targets(const ModelConfig& config, const std::vector<const VideoTensor*>& targets);

/// Splits network output into one video per batch item.
std::vector<VideoTensor> unpack_videos(const nn::Tensor<float>& output, int horizon);

/// Single-sample forward. mode=sample draws standard-normal noise from `seed`.
PredictionOutput predict(const Model& model, const SemanticFrame& initial, const DirectionMap& direction,
                         const FlowField& flow, SampleMode mode, std::uint64_t seed = 0);

/// Single-sample forward with caller-supplied noise (latent-sized).
PredictionOutput predict_with_noise(const Model& model, const SemanticFrame& initial, const DirectionMap& direction,
                                    const FlowField& flow, const std::vector<float>& noise);

}  // namespace f2v
