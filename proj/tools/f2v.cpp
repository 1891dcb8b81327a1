#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "f2v/cli/run_config.hpp"
#include "f2v/core/errors.hpp"
#include "f2v/evaluator/plots.hpp"
#include "f2v/evaluator/report.hpp"
#include "f2v/ingest/dataset.hpp"
#include "f2v/model/checkpoint.hpp"
#include "f2v/scorer/scores_io.hpp"
#include "f2v/synth/synth.hpp"
#include "f2v/trainer/trainer.hpp"

namespace fs = std::filesystem;
using namespace f2v;

namespace {

struct UsageError : Error {
  using Error::Error;
};

struct Flags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> data;
  // synth
  bool force = false;
  std::optional<int> image_size;
  // train
  std::optional<int> epochs;
  std::optional<double> beta;
  std::optional<std::string> resume;
  bool tiny = false;
  bool zero_noise = false;
  bool clip_gradients = false;
  // score / eval / plot
  std::optional<std::string> checkpoint;
  std::optional<int> timestep;
  std::optional<std::string> scores;
  bool maps = false;
  bool per_clip = false;
};

RunConfig build_config(const Flags& f) {
  RunConfig cfg = RunConfig::defaults();
  std::optional<std::string> path = f.config;
  if (!path) {
    if (const char* env = std::getenv(kConfigEnvVar); env && *env) path = env;
  }
  if (path) cfg = load_run_config(*path, cfg);
  if (f.seed) cfg.propagate_seed(*f.seed);
  if (f.out) cfg.out = *f.out;
  if (f.data) cfg.data_root = *f.data;
  if (f.image_size) cfg.synth_image_size = *f.image_size;
  if (f.tiny) cfg.model = ModelConfig::tiny();
  if (f.epochs) cfg.train.epochs = *f.epochs;
  if (f.beta) cfg.train.beta = *f.beta;
  if (f.zero_noise) cfg.train.zero_noise = true;
  if (f.clip_gradients) cfg.train.clip_gradients = true;
  if (f.timestep) cfg.score.timestep = *f.timestep;
  if (f.maps) cfg.score.keep_maps = true;
  if (f.per_clip) cfg.eval.per_clip_average = true;
  cfg.validate();
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

int cmd_synth(const Flags& f) {
  if (!f.out) throw UsageError("synth requires --out");
  const RunConfig cfg = build_config(f);
  const Benchmark bench = default_benchmark(cfg.seed, cfg.synth_image_size);
  const Manifest m = gen_dataset(bench, cfg.out, f.force);
  std::printf("%s\n", (cfg.out / "manifest.json").string().c_str());
  std::fprintf(stderr, "%d clips, %d frames\n", m.num_clips, m.num_frames);
  return 0;
}

int cmd_train(const Flags& f) {
  RunConfig cfg = build_config(f);
  fs::create_directories(cfg.out);
  FitOptions opts;
  opts.out_dir = cfg.out;
  opts.on_epoch = [](const EpochSummary& s) {
    std::fprintf(stderr, "epoch %3d  lr %.2e  l_rec %.6f  l_tg %.6f  kl %.4f  total %.6f  (%.1fs)\n", s.epoch, s.lr,
                 s.l_rec, s.l_tg, s.kl, s.total, s.seconds);
  };
  std::optional<Checkpoint> resumed;
  if (f.resume) {
    resumed = load_checkpoint(*f.resume);
    if (!resumed->optimizer) throw ConfigError("checkpoint " + *f.resume + " has no optimizer state");
    cfg.model = resumed->model.config();
    opts.resume_optimizer = resumed->optimizer;
    opts.start_epoch = resumed->epoch;
  }
  Model model = resumed ? std::move(resumed->model) : Model(cfg.model);
  TrainConfig tc = cfg.train;
  tc.epochs = std::max(0, cfg.train.epochs - opts.start_epoch);
  write_text(cfg.out / "config.yaml", to_yaml(cfg));
  const ClipDataset data = load_dataset(cfg.data_root, Split::train, cfg.model.image_size);
  if (!f.resume) initialize_for_training(model, cfg.train, &data);
  const TrainResult r = fit(data, model, tc, opts);
  if (tc.epochs == 0) save_checkpoint(cfg.out / "last.ckpt", model, opts.start_epoch, opts.resume_optimizer ? &*opts.resume_optimizer : nullptr);
  std::printf("%s\n", (cfg.out / "last.ckpt").string().c_str());
  std::fprintf(stderr, "trained to epoch %d\n", r.final_epoch);
  return 0;
}

int cmd_score(const Flags& f) {
  const RunConfig cfg = build_config(f);
  const fs::path ckpt = f.checkpoint ? fs::path(*f.checkpoint) : cfg.out / "last.ckpt";
  const Checkpoint cp = load_checkpoint(ckpt);
  const ClipDataset data = load_dataset(cfg.data_root, Split::test, cp.model.config().image_size);
  fs::create_directories(cfg.out);
  std::vector<AnomalyScoreSeries> all;
  for (const auto& clip : data.clips) {
    ClipScore s = score_clip(cp.model, clip, cfg.score);
    if (s.warning) {
      std::fprintf(stderr, "warning: %s\n", s.warning->c_str());
      continue;
    }
    if (cfg.score.keep_maps) write_anomaly_maps(cfg.out / clip.clip_id / "maps", s.maps);
    all.push_back(std::move(s.series));
  }
  write_scores_csv(cfg.out / "scores.csv", all);
  std::printf("%s\n", (cfg.out / "scores.csv").string().c_str());
  return 0;
}

int cmd_eval(const Flags& f) {
  const RunConfig cfg = build_config(f);
  const fs::path scores_path = f.scores ? fs::path(*f.scores) : cfg.out / "scores.csv";
  const auto series = read_scores_csv(scores_path);
  const auto labels = load_labels_for(cfg.data_root, series);
  std::vector<LabelledSeries> clips;
  for (std::size_t i = 0; i < series.size(); ++i) clips.push_back({&series[i], &labels[i]});
  const EvalReport report = per_timestep_table(clips, cfg.eval);
  fs::create_directories(cfg.out);
  write_report_json(cfg.out / "report.json", report, cfg.eval);
  write_report_csv(cfg.out / "report.csv", report);
  write_roc_svg(cfg.out / "roc.svg", report.roc_points, report.auc_all);
  write_timestep_svg(cfg.out / "timesteps.svg", report.auc_per_timestep, report.auc_all);
  std::printf("auc_all %.4f\n", report.auc_all);
  for (const auto& [name, g] : report.groups) std::printf("  %-16s %.4f\n", name.c_str(), g.auc_all);
  return 0;
}

int cmd_plot(const Flags& f) {
  const RunConfig cfg = build_config(f);
  const fs::path scores_path = f.scores ? fs::path(*f.scores) : cfg.out / "scores.csv";
  const auto series = read_scores_csv(scores_path);
  const auto labels = load_labels_for(cfg.data_root, series);
  const fs::path dir = cfg.out / "plots";
  fs::create_directories(dir);
  for (std::size_t i = 0; i < series.size(); ++i) {
    write_timeline_svg(dir / (series[i].clip_id + ".svg"), series[i], labels[i]);
  }
  std::printf("%s\n", dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frame-to-video anomaly detection pipeline"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, std::string("YAML run config (default: $") + kConfigEnvVar + ")");
  app.add_option("--seed", f.seed, "Seed for data generation and training");
  app.add_option("--out", f.out, "Output directory");

  auto* synth = app.add_subcommand("synth", "Generate the synthetic benchmark");
  synth->add_option("--image-size", f.image_size, "Frame size in pixels");
  synth->add_flag("--force", f.force, "Overwrite a non-empty output directory");

  auto* train = app.add_subcommand("train", "Train a model on the train split");
  train->add_option("--data", f.data, "Dataset root");
  train->add_option("--epochs", f.epochs, "Total epoch budget");
  train->add_option("--beta", f.beta, "KL weight");
  train->add_option("--resume", f.resume, "Continue from a checkpoint");
  train->add_flag("--tiny", f.tiny, "32 px three-stage model");
  train->add_flag("--zero-noise", f.zero_noise, "Reparameterize with zero noise");
  train->add_flag("--clip-gradients", f.clip_gradients, "Clip the gradient norm");

  auto* score = app.add_subcommand("score", "Score the test split");
  score->add_option("--data", f.data, "Dataset root");
  score->add_option("--checkpoint", f.checkpoint, "Checkpoint (default: <out>/last.ckpt)");
  score->add_option("--timestep", f.timestep, "Score with one timestep (1..horizon) instead of the mean");
  score->add_flag("--maps", f.maps, "Write per-pixel anomaly maps");

  auto* eval = app.add_subcommand("eval", "Frame-level AUC report");
  eval->add_option("--data", f.data, "Dataset root (for labels)");
  eval->add_option("--scores", f.scores, "Scores CSV (default: <out>/scores.csv)");
  eval->add_flag("--per-clip", f.per_clip, "Also report the mean of per-clip AUCs");

  auto* plot = app.add_subcommand("plot", "Per-clip score timelines");
  plot->add_option("--data", f.data, "Dataset root (for labels)");
  plot->add_option("--scores", f.scores, "Scores CSV (default: <out>/scores.csv)");

  for (auto* sub : {synth, train, score, eval, plot}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) return cmd_synth(f);
    if (*train) return cmd_train(f);
    if (*score) return cmd_score(f);
    if (*eval) return cmd_eval(f);
    if (*plot) return cmd_plot(f);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const UndefinedMetricError& e) {
    std::cerr << "undefined metric: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
