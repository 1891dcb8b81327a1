#pragma once

#include <string>
#include <vector>

namespace f2v {

enum class FlowInput { uv, magnitude };

struct ModelConfig {
  int image_size = 128;
  int horizon = 10;
  std::vector<int> stage_channels{32, 64, 128, 256, 512};
  int latent_channels = 512;
  int latent_spatial = 4;
  double leaky_slope = 0.1;
  FlowInput flow_input = FlowInput::uv;

  /// 32x32 inputs, three stages, 64x4x4 latents. Used by gradient tests.
  static ModelConfig tiny();

  int num_stages() const { return static_cast<int>(stage_channels.size()); }
  int sm_in_channels() const { return 5; }  // 3 semantic + 2 direction
  int of_in_channels() const { return flow_input == FlowInput::uv ? 2 : 1; }
  int feature_channels() const { return stage_channels.back(); }
  int output_channels() const { return 3 * horizon; }

  /// Throws ConfigError when the stage arithmetic does not reach latent_spatial.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

const char* flow_input_name(FlowInput f);
FlowInput parse_flow_input(const std::string& s);

}  // namespace f2v
