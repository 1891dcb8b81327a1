#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "f2v/core/palette.hpp"
#include "f2v/core/types.hpp"

namespace f2v {

enum class Split { train, test };

const char* split_name(Split split);
Split parse_split(const std::string& name);

struct Clip {
  std::string clip_id;
  std::vector<SemanticFrame> frames;
  std::vector<FlowField> flows;  // flows[t] maps frame t -> t+1
  std::optional<std::vector<int>> labels;

  int num_frames() const { return static_cast<int>(frames.size()); }
  /// Throws LoadError when frame/flow/label counts or sizes disagree.
  void validate() const;
};

struct ClipDataset {
  Split split = Split::train;
  std::vector<Clip> clips;
  ClassPalette palette;
};

inline constexpr int kDefaultImageSize = 128;

/// Loads root/<split>/<clip_id>/... resized to target_size x target_size.
/// Frames use nearest-neighbour resampling; flow is bilinear with the vectors
/// rescaled by the resize ratio.
ClipDataset load_dataset(const std::filesystem::path& root, Split split, int target_size = kDefaultImageSize);

ClassPalette read_palette_json(const std::filesystem::path& path);
void write_palette_json(const std::filesystem::path& path, const ClassPalette& palette);

std::vector<int> read_labels_csv(const std::filesystem::path& path);
void write_labels_csv(const std::filesystem::path& path, const std::vector<int>& labels);

/// Writes one clip under root/<split>/<clip_id>/ in the dataset layout.
void write_clip(const std::filesystem::path& root, Split split, const Clip& clip);

SemanticFrame resize_nearest(const SemanticFrame& frame, int height, int width);
FlowField resize_flow_bilinear(const FlowField& flow, int height, int width);

/// FNV-1a over the 8-bit quantized frames, the raw float32 flow bits and the
/// labels. Equal for a clip before writing and after loading at native size.
std::uint64_t clip_checksum(const Clip& clip);

}  // namespace f2v
