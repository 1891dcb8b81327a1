#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "f2v/core/flow.hpp"
#include "f2v/ingest/dataset.hpp"
#include "f2v/losses/losses.hpp"
#include "f2v/model/checkpoint.hpp"

namespace f2v {

struct TrainConfig {
  int batch_size = 16;
  double lr_initial = 1e-3;
  int lr_halve_every = 10;
  int epochs = 60;
  double beta = 1.0;
  std::uint64_t seed = 0;
  int checkpoint_every = 10;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  bool clip_gradients = false;
  double clip_norm = 5.0;
  // Reparameterize with zero noise: makes training independent of sampling.
  bool zero_noise = false;
  float eps_motion = kDefaultMotionEpsilon;

  void validate() const;
};

/// lr_initial * 0.5^floor(epoch / lr_halve_every), epoch counted from 0.
double lr_at(int epoch, const TrainConfig& cfg);

struct LogRow {
  int epoch = 0;
  std::int64_t step = 0;
  LossReport loss;
};

struct EpochSummary {
  int epoch = 0;
  double lr = 0.0;
  int steps = 0;
  double l_rec = 0.0;
  double l_tg = 0.0;
  double kl = 0.0;
  double total = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<LogRow> log;
  std::vector<EpochSummary> epochs;
  int final_epoch = 0;  // completed epochs, including resumed ones
  OptimizerState optimizer;
};

// Adaptive-moment optimizer over a model's parameter blobs.
class Adam {
 public:
  Adam(const Model& model, double beta1, double beta2, double epsilon);
  Adam(OptimizerState state, double beta1, double beta2, double epsilon);

  void step(Model& model, double lr);
  const OptimizerState& state() const { return state_; }

 private:
  OptimizerState state_;
  double beta1_;
  double beta2_;
  double epsilon_;
};

struct FitOptions {
  /// Checkpoints and train_log.csv go here; nothing is written when empty.
  std::filesystem::path out_dir;
  /// Continue from this optimizer state and epoch counter.
  std::optional<OptimizerState> resume_optimizer;
  int start_epoch = 0;
  std::function<void(const EpochSummary&)> on_epoch;
};

/// Mean color value over every frame of the train split.
double mean_target_value(const ClipDataset& dataset);

/// Seeded fan-in init; when `dataset` is given the output bias starts at the
/// logit of its mean color value so initial predictions match the prior.
void initialize_for_training(Model& model, const TrainConfig& cfg, const ClipDataset* dataset = nullptr);

/// Optimizes `model` on every horizon-length window of the train split.
/// Throws ConfigError when no training sample exists.
TrainResult fit(const ClipDataset& dataset, Model& model, const TrainConfig& cfg, const FitOptions& options = {});

void write_log_csv(const std::filesystem::path& path, const std::vector<LogRow>& rows, bool append);

}  // namespace f2v
