#include "f2v/model/config.hpp"

#include <string>

#include "f2v/core/errors.hpp"

namespace f2v {

ModelConfig ModelConfig::tiny() {
  ModelConfig cfg;
  cfg.image_size = 32;
  cfg.stage_channels = {16, 32, 64};
  cfg.latent_channels = 64;
  return cfg;
}

void ModelConfig::validate() const {
  if (stage_channels.empty()) throw ConfigError("stage_channels must not be empty");
  for (int c : stage_channels) {
    if (c <= 0) throw ConfigError("stage channel counts must be positive");
  }
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (latent_channels <= 0 || latent_spatial <= 0) throw ConfigError("latent sizes must be positive");
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw ConfigError("leaky_slope must be in (0, 1)");
  if (image_size != latent_spatial << num_stages()) {
    throw ConfigError("image_size " + std::to_string(image_size) + " with " + std::to_string(num_stages()) +
                      " stages does not reduce to latent_spatial " + std::to_string(latent_spatial));
  }
}

const char* flow_input_name(FlowInput f) { return f == FlowInput::uv ? "uv" : "magnitude"; }

FlowInput parse_flow_input(const std::string& s) {
  if (s == "uv") return FlowInput::uv;
  if (s == "magnitude") return FlowInput::magnitude;
  throw ConfigError("flow_input must be 'uv' or 'magnitude', got '" + s + "'");
}

}  // namespace f2v
