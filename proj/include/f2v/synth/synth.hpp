#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "f2v/core/palette.hpp"
#include "f2v/core/types.hpp"
#include "f2v/ingest/dataset.hpp"

namespace f2v {

enum class Shape { disk, square };
enum class AnomalyKind { novel_class, fast_motion, wrong_direction };
// One-way lanes: even lanes move toward +axis, odd lanes toward -axis.
// `bounce` ignores the lane and picks a random sign.
enum class HeadingPolicy { lane, bounce };

const char* shape_name(Shape s);
const char* anomaly_name(AnomalyKind k);
AnomalyKind parse_anomaly(const std::string& name);

struct AgentSpec {
  int class_id = 1;
  Shape shape = Shape::disk;
  double size_px = 6.0;  // diameter or side
  double speed_px_per_frame = 1.0;
  HeadingPolicy heading = HeadingPolicy::lane;
};

struct AnomalySpec {
  AnomalyKind kind = AnomalyKind::fast_motion;
  int onset_frame = 20;  // 1-based ordinal of the first anomalous frame
  int agent_index = 0;   // which of the clip's agents misbehaves (mod agent count)
  double speed_factor = 3.0;
  AgentSpec novel_agent{4, Shape::square, 7.0, 1.0, HeadingPolicy::lane};
};

/// Clips drawn from one script share its agent catalog and anomaly; each clip
/// samples its own orientation, lanes, classes and start positions.
struct SceneScript {
  std::string name = "clip";
  std::uint64_t seed = 0;
  int num_clips = 1;
  int frames_per_clip = 40;
  int image_size = 64;
  int lanes = 5;
  int min_agents = 2;
  int max_agents = 4;
  std::vector<AgentSpec> agents;
  std::optional<AnomalySpec> anomaly_spec;

  void validate() const;
};

struct Benchmark {
  std::uint64_t seed = 0;
  ClassPalette palette = ClassPalette::default_palette();
  SceneScript train;
  std::vector<SceneScript> test;

  /// Throws ScriptError for anomalies in training or novel classes seen in training.
  void validate() const;
};

/// 64 train clips x 40 frames; test: 8 normal, 4 novel_class, 2 fast_motion, 2 wrong_direction.
/// Geometry is defined at 64 px and scaled linearly to image_size.
Benchmark default_benchmark(std::uint64_t seed, int image_size = 64);

// Where one agent is drawn in one frame.
struct Placement {
  int class_id = 0;
  Shape shape = Shape::disk;
  int half = 0;  // extent from center, pixels
  int cx = 0;
  int cy = 0;
  bool visible = true;
};

bool covers(const Placement& p, int x, int y);
ClassMap render_class_map(const std::vector<Placement>& agents, int height, int width);

/// Per-pixel displacement of the agent covering the pixel at t; background 0.
/// `now[i]` and `next[i]` are the same agent. Overlapping agents -> ScriptError.
FlowField analytic_flow(const std::vector<Placement>& now, const std::vector<Placement>& next, int height, int width);

struct ClipTrajectory {
  std::vector<std::vector<Placement>> frames;  // [frame][agent]
  std::optional<int> first_anomalous;          // 0-based frame index
};

ClipTrajectory plan_clip(const SceneScript& script, int clip_index);
Clip synthesize_clip(const SceneScript& script, int clip_index, const ClassPalette& palette, bool labelled);

struct ManifestClip {
  std::string clip_id;
  Split split = Split::train;
  int num_frames = 0;
  std::optional<AnomalyKind> anomaly;
  std::optional<std::pair<int, int>> anomaly_frames;  // inclusive range
  std::uint64_t checksum = 0;
};

struct Manifest {
  std::uint64_t seed = 0;
  int image_size = 0;
  int num_clips = 0;
  int num_frames = 0;
  std::vector<ManifestClip> clips;
};

/// Writes palette.json, manifest.json and the train/test trees. Refuses a
/// non-empty root with OverwriteError unless `force`.
Manifest gen_dataset(const Benchmark& bench, const std::filesystem::path& root, bool force = false);

void write_manifest_json(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest_json(const std::filesystem::path& path);

}  // namespace f2v
