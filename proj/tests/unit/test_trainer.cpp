#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "f2v/core/errors.hpp"
#include "f2v/synth/synth.hpp"
#include "f2v/trainer/trainer.hpp"
#include "helpers.hpp"

using namespace f2v;
using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

ModelConfig small_model() {
  ModelConfig c = ModelConfig::tiny();
  c.stage_channels = {4, 8, 16};
  c.latent_channels = 8;
  return c;
}

// `clips` synthetic clips of `frames` frames at 32 px.
ClipDataset synth_train(int clips, int frames) {
  Benchmark b = default_benchmark(5, 32);
  b.train.frames_per_clip = frames;
  ClipDataset ds;
  ds.split = Split::train;
  ds.palette = b.palette;
  for (int i = 0; i < clips; ++i) ds.clips.push_back(synthesize_clip(b.train, i, b.palette, false));
  return ds;
}

TrainConfig quick(int epochs) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.seed = 3;
  cfg.checkpoint_every = 0;
  return cfg;
}

std::vector<std::vector<float>> values(const Model& m) {
  std::vector<std::vector<float>> out;
  for (const auto& p : m.parameters().all()) out.push_back(p.value);
  return out;
}

std::vector<double> totals(const TrainResult& r) {
  std::vector<double> out;
  for (const auto& row : r.log) out.push_back(row.loss.total);
  return out;
}

}  // namespace

TEST_CASE("learning-rate schedule") {
  TrainConfig cfg;
  CHECK(lr_at(0, cfg) == doctest::Approx(1e-3));
  CHECK(lr_at(9, cfg) == doctest::Approx(1e-3));
  CHECK(lr_at(10, cfg) == doctest::Approx(5e-4));
  CHECK(lr_at(25, cfg) == doctest::Approx(2.5e-4));
  CHECK(lr_at(59, cfg) == doctest::Approx(1e-3 / 32));
}

TEST_CASE("default hyperparameters") {
  const TrainConfig cfg;
  CHECK(cfg.batch_size == 16);
  CHECK(cfg.epochs == 60);
  CHECK(cfg.beta == 1.0);
  CHECK(cfg.adam_beta1 == 0.9);
  CHECK(cfg.adam_beta2 == 0.999);
  CHECK(cfg.adam_epsilon == 1e-8);
  CHECK(!cfg.clip_gradients);
  CHECK(cfg.clip_norm == 5.0);
}

TEST_CASE("invalid configs and empty sample sets are configuration errors") {
  TrainConfig cfg = quick(1);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = quick(1);
  cfg.beta = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  Model m(small_model());
  m.initialize(1);
  CHECK_THROWS_AS(fit(synth_train(2, 11), m, quick(1)), ConfigError);
  ClipDataset empty;
  CHECK_THROWS_AS(fit(empty, m, quick(1)), ConfigError);
  ClipDataset test = synth_train(1, 20);
  test.split = Split::test;
  CHECK_THROWS_AS(fit(test, m, quick(1)), ConfigError);
}

TEST_CASE("16 samples make one optimizer step and one log row per epoch") {
  const ClipDataset ds = synth_train(1, 27);  // t in 1..16
  Model m(small_model());
  const TrainConfig cfg = quick(2);
  initialize_for_training(m, cfg, &ds);
  TempDir dir("train");
  FitOptions opt;
  opt.out_dir = dir.path;
  const TrainResult r = fit(ds, m, cfg, opt);
  REQUIRE(r.log.size() == 2);
  CHECK(r.log[0].epoch == 0);
  CHECK(r.log[1].epoch == 1);
  CHECK(r.log[1].step == 1);
  CHECK(r.optimizer.step == 2);
  CHECK(r.epochs.size() == 2);
  CHECK(r.epochs[0].steps == 1);
  CHECK(fs::exists(dir.path / "last.ckpt"));
  const std::string csv = testutil::read_bytes(dir.path / "train_log.csv");
  CHECK(csv.rfind("epoch,step,l_rec,l_tg,kl,total\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("periodic checkpoints") {
  const ClipDataset ds = synth_train(1, 14);
  Model m(small_model());
  TrainConfig cfg = quick(4);
  cfg.checkpoint_every = 2;
  initialize_for_training(m, cfg, &ds);
  TempDir dir("train");
  FitOptions opt;
  opt.out_dir = dir.path;
  fit(ds, m, cfg, opt);
  CHECK(fs::exists(dir.path / "checkpoint_epoch0002.ckpt"));
  CHECK(fs::exists(dir.path / "checkpoint_epoch0004.ckpt"));
  CHECK(!fs::exists(dir.path / "checkpoint_epoch0003.ckpt"));
  CHECK(load_checkpoint(dir.path / "last.ckpt").epoch == 4);
}

TEST_CASE("property: same seed gives identical loss curves and weights") {
  const ClipDataset ds = synth_train(2, 20);
  const TrainConfig cfg = quick(2);
  Model a(small_model()), b(small_model()), c(small_model());
  initialize_for_training(a, cfg, &ds);
  initialize_for_training(b, cfg, &ds);
  const auto ra = fit(ds, a, cfg);
  const auto rb = fit(ds, b, cfg);
  CHECK(totals(ra) == totals(rb));
  CHECK(values(a) == values(b));
  TrainConfig other = cfg;
  other.seed = 4;
  initialize_for_training(c, other, &ds);
  CHECK(totals(fit(ds, c, other)) != totals(ra));
}

TEST_CASE("property: beta 0 with zero noise trains deterministically") {
  const ClipDataset ds = synth_train(2, 20);
  TrainConfig cfg = quick(2);
  cfg.beta = 0.0;
  cfg.zero_noise = true;
  Model a(small_model()), b(small_model());
  initialize_for_training(a, cfg, &ds);
  initialize_for_training(b, cfg, &ds);
  const auto ra = fit(ds, a, cfg);
  CHECK(totals(ra) == totals(fit(ds, b, cfg)));
  CHECK(values(a) == values(b));
  for (const auto& row : ra.log) CHECK(row.loss.total == doctest::Approx(row.loss.l_rec + row.loss.l_tg));
}

TEST_CASE("property: training never mutates the dataset") {
  const ClipDataset ds = synth_train(2, 16);
  const ClipDataset copy = ds;
  Model m(small_model());
  initialize_for_training(m, quick(1), &ds);
  fit(ds, m, quick(1));
  for (std::size_t i = 0; i < ds.clips.size(); ++i) {
    CHECK(ds.clips[i].frames == copy.clips[i].frames);
    CHECK(ds.clips[i].flows == copy.clips[i].flows);
  }
}

TEST_CASE("resuming from a checkpoint matches an uninterrupted run") {
  const ClipDataset ds = synth_train(2, 20);
  TempDir dir("train");
  const TrainConfig two = quick(2);
  Model full(small_model());
  initialize_for_training(full, two, &ds);
  const auto rf = fit(ds, full, two);

  Model part(small_model());
  initialize_for_training(part, two, &ds);
  FitOptions first;
  first.out_dir = dir.path;
  fit(ds, part, quick(1), first);
  Checkpoint ck = load_checkpoint(dir.path / "last.ckpt");
  CHECK(ck.epoch == 1);
  FitOptions second;
  second.out_dir = dir.path;
  second.resume_optimizer = ck.optimizer;
  second.start_epoch = ck.epoch;
  const auto rs = fit(ds, ck.model, quick(1), second);
  CHECK(rs.final_epoch == 2);
  CHECK(values(ck.model) == values(full));
  REQUIRE(rs.log.size() * 2 == rf.log.size());
  CHECK(rs.log.back().loss.total == rf.log.back().loss.total);
  // log appended, not overwritten
  const std::string csv = testutil::read_bytes(dir.path / "train_log.csv");
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == rf.log.size() + 1);
}

TEST_CASE("Adam update matches a hand-computed oracle") {
  ModelConfig cfg = small_model();
  Model m(cfg);
  m.initialize(1);
  const auto before = values(m);
  Adam adam(m, 0.9, 0.999, 1e-8);
  const double lr = 1e-2;
  const std::vector<float> g1{0.5f, -2.0f}, g2{0.1f, 3.0f};
  auto& p = m.parameters()[0];
  const auto set = [&](const std::vector<float>& g) {
    m.parameters().zero_grad();
    p.grad[0] = g[0];
    p.grad[1] = g[1];
  };
  set(g1);
  adam.step(m, lr);
  set(g2);
  adam.step(m, lr);
  for (int j = 0; j < 2; ++j) {
    double mm = 0, vv = 0, x = before[0][j];
    const double gs[2] = {g1[j], g2[j]};
    for (int t = 1; t <= 2; ++t) {
      mm = 0.9 * mm + 0.1 * gs[t - 1];
      vv = 0.999 * vv + 0.001 * gs[t - 1] * gs[t - 1];
      const double mh = mm / (1 - std::pow(0.9, t)), vh = vv / (1 - std::pow(0.999, t));
      x -= lr * mh / (std::sqrt(vh) + 1e-8);
    }
    CHECK(p.value[j] == doctest::Approx(x).epsilon(1e-5));
  }
  // untouched entries with zero gradient stay put
  CHECK(p.value[2] == before[0][2]);
  CHECK(values(m)[1] == before[1]);
  CHECK(adam.state().step == 2);
}

TEST_CASE("gradient norm clipping") {
  const ClipDataset ds = synth_train(1, 27);
  const auto run = [&](bool clip, double norm) {
    TrainConfig cfg = quick(1);
    cfg.clip_gradients = clip;
    cfg.clip_norm = norm;
    Model m(small_model());
    initialize_for_training(m, cfg, &ds);
    const auto before = values(m);
    fit(ds, m, cfg);
    double worst = 0.0;
    const auto after = values(m);
    for (std::size_t i = 0; i < after.size(); ++i) {
      for (std::size_t j = 0; j < after[i].size(); ++j) {
        worst = std::max(worst, static_cast<double>(std::abs(after[i][j] - before[i][j])));
      }
    }
    return std::pair{after, worst};
  };
  const auto plain = run(false, 5.0);
  CHECK(run(true, 1e30).first == plain.first);
  // a norm far below epsilon makes the first Adam step nearly vanish
  const auto tight = run(true, 1e-12);
  CHECK(plain.second == doctest::Approx(1e-3).epsilon(0.01));
  CHECK(tight.second < 1e-3 * 1e-3);
}

TEST_CASE("output bias starts at the logit of the mean color") {
  const ClipDataset ds = synth_train(2, 12);
  Model m(small_model());
  initialize_for_training(m, quick(1), &ds);
  const double p = mean_target_value(ds);
  CHECK(p > 0.0);
  CHECK(p < 0.5);
  for (float b : m.parameters().find("dec.out.bias").value) CHECK(b == doctest::Approx(std::log(p / (1 - p))));
}
