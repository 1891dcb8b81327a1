#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "f2v/evaluator/report.hpp"
#include "f2v/model/config.hpp"
#include "f2v/scorer/scorer.hpp"
#include "f2v/trainer/trainer.hpp"

namespace f2v {

inline constexpr const char* kConfigEnvVar = "F2V_CONFIG";

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path data_root = "data/bench";
  std::filesystem::path out = "runs/default";
  int synth_image_size = 64;
  bool tiny = false;
  ModelConfig model;
  TrainConfig train;
  ScoreConfig score;
  EvalConfig eval;

  /// Full-size model at 128 px and a 128 px synthetic benchmark.
  static RunConfig defaults();

  void validate() const;
  /// Copies the global seed into the training config.
  void propagate_seed(std::uint64_t s);
};

/// Overlays the keys present in `yaml_text`; unknown keys are ConfigError.
void apply_yaml(RunConfig& cfg, const std::string& yaml_text);
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = RunConfig::defaults());
std::string to_yaml(const RunConfig& cfg);

}  // namespace f2v
