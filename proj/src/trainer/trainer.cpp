#include "f2v/trainer/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "f2v/core/errors.hpp"
#include "f2v/core/rng.hpp"
#include "f2v/ingest/samples.hpp"
#include "f2v/nn/fp_env.hpp"

namespace f2v {
namespace {

struct SampleRef {
  int clip = 0;
  int t = 0;
};

constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kShuffleStream = 0x5A5A;
constexpr std::uint64_t kNoiseStream = 0x401E;

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(lr_initial > 0.0)) throw ConfigError("lr_initial must be > 0");
  if (lr_halve_every < 1) throw ConfigError("lr_halve_every must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("adam decay rates must be in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be > 0");
  if (clip_gradients && !(clip_norm > 0.0)) throw ConfigError("clip_norm must be > 0");
}

double lr_at(int epoch, const TrainConfig& cfg) {
  return cfg.lr_initial * std::pow(0.5, epoch / cfg.lr_halve_every);
}

Adam::Adam(const Model& model, double beta1, double beta2, double epsilon)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  for (const auto& p : model.parameters().all()) {
    state_.m.emplace_back(p.size(), 0.0f);
    state_.v.emplace_back(p.size(), 0.0f);
  }
}

Adam::Adam(OptimizerState state, double beta1, double beta2, double epsilon)
    : state_(std::move(state)), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

void Adam::step(Model& model, double lr) {
  auto& params = model.parameters().all();
  if (state_.m.size() != params.size()) throw Error("optimizer state does not match the model");
  ++state_.step;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(state_.step));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(state_.step));
  const auto b1 = static_cast<float>(beta1_);
  const auto b2 = static_cast<float>(beta2_);
  const auto step_size = static_cast<float>(lr / c1);
  const auto inv_c2 = static_cast<float>(1.0 / c2);
  const auto eps = static_cast<float>(epsilon_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = state_.m[i];
    auto& v = state_.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const float g = p.grad[j];
      m[j] = b1 * m[j] + (1.0f - b1) * g;
      v[j] = b2 * v[j] + (1.0f - b2) * g * g;
      p.value[j] -= step_size * m[j] / (std::sqrt(v[j] * inv_c2) + eps);
    }
  }
}

double mean_target_value(const ClipDataset& dataset) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& clip : dataset.clips) {
    for (const auto& f : clip.frames) {
      for (float v : f.image.data) acc += v;
      n += f.image.data.size();
    }
  }
  return n ? acc / static_cast<double>(n) : 0.5;
}

void initialize_for_training(Model& model, const TrainConfig& cfg, const ClipDataset* dataset) {
  model.initialize(derive_seed(cfg.seed, kInitStream));
  if (!dataset) return;
  const double p = std::clamp(mean_target_value(*dataset), 1e-4, 1.0 - 1e-4);
  for (float& b : model.parameters().find("dec.out.bias").value) b = static_cast<float>(std::log(p / (1.0 - p)));
}

void write_log_csv(const std::filesystem::path& path, const std::vector<LogRow>& rows, bool append) {
  const bool header = !append || !std::filesystem::exists(path);
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  if (header) out << "epoch,step,l_rec,l_tg,kl,total\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%lld,%.9g,%.9g,%.9g,%.9g\n", r.epoch, static_cast<long long>(r.step),
                  r.loss.l_rec, r.loss.l_tg, r.loss.kl, r.loss.total);
    out << buf;
  }
}

TrainResult fit(const ClipDataset& dataset, Model& model, const TrainConfig& cfg, const FitOptions& options) {
  cfg.validate();
  const nn::FlushDenormals ftz;
  if (dataset.split != Split::train) throw ConfigError("training requires the train split");
  const ModelConfig& mc = model.config();

  std::vector<SampleRef> samples;
  for (std::size_t c = 0; c < dataset.clips.size(); ++c) {
    const Clip& clip = dataset.clips[c];
    if (clip.num_frames() > 0 && clip.frames.front().height() != mc.image_size) {
      throw ConfigError("clip '" + clip.clip_id + "' is " + std::to_string(clip.frames.front().height()) +
                        " px but the model expects " + std::to_string(mc.image_size));
    }
    for (int t : initial_frame_indices(clip.num_frames(), mc.horizon)) samples.push_back({static_cast<int>(c), t});
  }
  if (samples.empty()) throw ConfigError("no training samples: every clip is shorter than horizon + 2 frames");

  Adam adam = options.resume_optimizer
                  ? Adam(*options.resume_optimizer, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon)
                  : Adam(model, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon);
  std::int64_t step = adam.state().step;

  const bool write = !options.out_dir.empty();
  if (write) std::filesystem::create_directories(options.out_dir);
  const auto log_path = options.out_dir / "train_log.csv";
  TrainResult result;
  result.final_epoch = options.start_epoch;

  nn::Tensor<float> noise;
  for (int epoch = options.start_epoch; epoch < options.start_epoch + cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = lr_at(epoch, cfg);
    std::vector<SampleRef> order = samples;
    Rng(derive_seed(derive_seed(cfg.seed, kShuffleStream), static_cast<std::uint64_t>(epoch))).shuffle(order);

    EpochSummary summary;
    summary.epoch = epoch;
    summary.lr = lr;
    std::vector<LogRow> rows;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const int batch = static_cast<int>(end - start);

      std::vector<DirectionMap> directions;
      std::vector<VideoTensor> targets;
      directions.reserve(end - start);
      targets.reserve(end - start);
      std::vector<FrameCue> cues;
      std::vector<const VideoTensor*> target_ptrs;
      for (std::size_t i = start; i < end; ++i) {
        const Clip& clip = dataset.clips[static_cast<std::size_t>(order[i].clip)];
        const int t = order[i].t;
        directions.push_back(compute_direction_map(clip.flows[static_cast<std::size_t>(t - 1)], cfg.eps_motion));
        VideoTensor target;
        for (int k = 1; k <= mc.horizon; ++k) target.frames.push_back(clip.frames[static_cast<std::size_t>(t + k)].image);
        targets.push_back(std::move(target));
      }
      for (std::size_t i = start; i < end; ++i) {
        const Clip& clip = dataset.clips[static_cast<std::size_t>(order[i].clip)];
        const int t = order[i].t;
        cues.push_back({&clip.frames[static_cast<std::size_t>(t)], &clip.flows[static_cast<std::size_t>(t - 1)],
                        &directions[i - start]});
        target_ptrs.push_back(&targets[i - start]);
      }
      const ModelInputs in = pack_inputs(mc, cues);
      const nn::Tensor<float> y = pack_targets(mc, target_ptrs);

      noise = nn::Tensor<float>(mc.latent_channels, batch, mc.latent_spatial, mc.latent_spatial);
      if (!cfg.zero_noise) {
        Rng(derive_seed(derive_seed(cfg.seed, kNoiseStream), static_cast<std::uint64_t>(step))).fill_normal(noise.data);
      }
      const ForwardState<float> st = model.forward(in.sm, in.of, &noise);

      LossGradients<float> grads;
      const LossReport loss = total_loss_with_grad<float>(y.data, st.output.data, mc.horizon, st.latent.mu.data,
                                                          st.latent.logvar.data, batch, cfg.beta, grads);
      if (!std::isfinite(loss.total)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", step " + std::to_string(step));
      }
      nn::Tensor<float> d_out(st.output.c, st.output.n, st.output.h, st.output.w);
      d_out.data = std::move(grads.d_y_hat);
      nn::Tensor<float> d_mu(st.latent.mu.c, batch, st.latent.mu.h, st.latent.mu.w);
      d_mu.data = std::move(grads.d_mu);
      nn::Tensor<float> d_logvar(d_mu.c, batch, d_mu.h, d_mu.w);
      d_logvar.data = std::move(grads.d_logvar);

      model.parameters().zero_grad();
      model.backward(st, d_out, d_mu, d_logvar);
      if (cfg.clip_gradients) {
        double sq = 0.0;
        for (const auto& p : model.parameters().all()) {
          for (float g : p.grad) sq += static_cast<double>(g) * g;
        }
        const double norm = std::sqrt(sq);
        if (norm > cfg.clip_norm) {
          const auto scale = static_cast<float>(cfg.clip_norm / norm);
          for (auto& p : model.parameters().all()) {
            for (float& g : p.grad) g *= scale;
          }
        }
      }
      adam.step(model, lr);

      rows.push_back({epoch, step, loss});
      summary.l_rec += loss.l_rec;
      summary.l_tg += loss.l_tg;
      summary.kl += loss.kl;
      summary.total += loss.total;
      ++summary.steps;
      ++step;
    }
    summary.l_rec /= summary.steps;
    summary.l_tg /= summary.steps;
    summary.kl /= summary.steps;
    summary.total /= summary.steps;
    summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    result.final_epoch = epoch + 1;
    if (write) {
      write_log_csv(log_path, rows, epoch > 0 || options.resume_optimizer.has_value());
      const bool last = epoch + 1 == options.start_epoch + cfg.epochs;
      if (cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0) {
        char name[64];
        std::snprintf(name, sizeof name, "checkpoint_epoch%04d.ckpt", epoch + 1);
        save_checkpoint(options.out_dir / name, model, epoch + 1, &adam.state());
      }
      if (last) save_checkpoint(options.out_dir / "last.ckpt", model, epoch + 1, &adam.state());
    }
    result.log.insert(result.log.end(), rows.begin(), rows.end());
    result.epochs.push_back(summary);
    if (options.on_epoch) options.on_epoch(summary);
  }
  result.optimizer = adam.state();
  return result;
}

}  // namespace f2v
