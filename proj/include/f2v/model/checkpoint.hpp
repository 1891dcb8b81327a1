#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "f2v/model/predictor.hpp"

namespace f2v {

// First/second moment buffers, one per parameter blob in model order.
struct OptimizerState {
  std::int64_t step = 0;
  std::vector<std::vector<float>> m;
  std::vector<std::vector<float>> v;
};

struct Checkpoint {
  Model model;
  int epoch = 0;
  std::optional<OptimizerState> optimizer;
};

// Layout: 8-byte magic "F2VCKPT1", little-endian u64 header length, JSON
// header (config, epoch, blob table), then little-endian float32 blobs.
void save_checkpoint(const std::filesystem::path& path, const Model& model, int epoch,
                     const OptimizerState* optimizer);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace f2v
