#include "f2v/cli/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "f2v/core/errors.hpp"

namespace f2v {
namespace {

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError("unknown config key '" + where + key + "'");
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
  if (!node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError("config key '" + where + key + "': " + e.what());
  }
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.synth_image_size = c.model.image_size;
  return c;
}

void RunConfig::propagate_seed(std::uint64_t s) {
  seed = s;
  train.seed = s;
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  score.validate(model.horizon);
  if (eval.sg_window < 1 || eval.sg_window % 2 == 0 || eval.sg_order < 0 || eval.sg_order >= eval.sg_window) {
    throw ConfigError("eval smoothing parameters are invalid");
  }
  if (synth_image_size < 8) throw ConfigError("synth.image_size must be >= 8");
}

void apply_yaml(RunConfig& cfg, const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed YAML: ") + e.what());
  }
  if (root.IsNull()) return;
  check_keys(root, {"seed", "data_root", "out", "synth", "model", "train", "score", "eval"}, "");
  if (root["seed"]) cfg.propagate_seed(root["seed"].as<std::uint64_t>());
  if (root["data_root"]) cfg.data_root = root["data_root"].as<std::string>();
  if (root["out"]) cfg.out = root["out"].as<std::string>();

  if (const auto n = root["synth"]) {
    check_keys(n, {"image_size"}, "synth.");
    read(n, "image_size", cfg.synth_image_size, "synth.");
  }
  if (const auto n = root["model"]) {
    check_keys(n, {"tiny", "image_size", "horizon", "stage_channels", "latent_channels", "latent_spatial",
                   "leaky_slope", "flow_input"},
               "model.");
    read(n, "tiny", cfg.tiny, "model.");
    if (cfg.tiny) cfg.model = ModelConfig::tiny();
    read(n, "image_size", cfg.model.image_size, "model.");
    read(n, "horizon", cfg.model.horizon, "model.");
    read(n, "stage_channels", cfg.model.stage_channels, "model.");
    read(n, "latent_channels", cfg.model.latent_channels, "model.");
    read(n, "latent_spatial", cfg.model.latent_spatial, "model.");
    read(n, "leaky_slope", cfg.model.leaky_slope, "model.");
    if (n["flow_input"]) cfg.model.flow_input = parse_flow_input(n["flow_input"].as<std::string>());
  }
  if (const auto n = root["train"]) {
    check_keys(n, {"batch_size", "lr_initial", "lr_halve_every", "epochs", "beta", "seed", "checkpoint_every",
                   "adam_beta1", "adam_beta2", "adam_epsilon", "clip_gradients", "clip_norm", "zero_noise",
                   "eps_motion"},
               "train.");
    auto& t = cfg.train;
    read(n, "batch_size", t.batch_size, "train.");
    read(n, "lr_initial", t.lr_initial, "train.");
    read(n, "lr_halve_every", t.lr_halve_every, "train.");
    read(n, "epochs", t.epochs, "train.");
    read(n, "beta", t.beta, "train.");
    read(n, "seed", t.seed, "train.");
    read(n, "checkpoint_every", t.checkpoint_every, "train.");
    read(n, "adam_beta1", t.adam_beta1, "train.");
    read(n, "adam_beta2", t.adam_beta2, "train.");
    read(n, "adam_epsilon", t.adam_epsilon, "train.");
    read(n, "clip_gradients", t.clip_gradients, "train.");
    read(n, "clip_norm", t.clip_norm, "train.");
    read(n, "zero_noise", t.zero_noise, "train.");
    read(n, "eps_motion", t.eps_motion, "train.");
    cfg.score.eps_motion = t.eps_motion;
  }
  if (const auto n = root["score"]) {
    check_keys(n, {"timestep", "sg_window", "sg_order", "order", "attribution", "batch_size", "maps"}, "score.");
    auto& s = cfg.score;
    read(n, "timestep", s.timestep, "score.");
    read(n, "sg_window", s.sg_window, "score.");
    read(n, "sg_order", s.sg_order, "score.");
    if (n["order"]) s.order = parse_smooth_order(n["order"].as<std::string>());
    if (n["attribution"]) s.attribution = parse_attribution(n["attribution"].as<std::string>());
    read(n, "batch_size", s.batch_size, "score.");
    read(n, "maps", s.keep_maps, "score.");
    cfg.eval.sg_window = s.sg_window;
    cfg.eval.sg_order = s.sg_order;
    cfg.eval.order = s.order;
  }
  if (const auto n = root["eval"]) {
    check_keys(n, {"per_clip_average"}, "eval.");
    read(n, "per_clip_average", cfg.eval.per_clip_average, "eval.");
  }
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  apply_yaml(base, ss.str());
  return base;
}

std::string to_yaml(const RunConfig& c) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::Key << "data_root" << YAML::Value << c.data_root.string();
  e << YAML::Key << "out" << YAML::Value << c.out.string();
  e << YAML::Key << "synth" << YAML::Value << YAML::BeginMap << YAML::Key << "image_size" << YAML::Value
    << c.synth_image_size << YAML::EndMap;
  e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "image_size" << YAML::Value << c.model.image_size;
  e << YAML::Key << "horizon" << YAML::Value << c.model.horizon;
  e << YAML::Key << "stage_channels" << YAML::Value << YAML::Flow << c.model.stage_channels;
  e << YAML::Key << "latent_channels" << YAML::Value << c.model.latent_channels;
  e << YAML::Key << "latent_spatial" << YAML::Value << c.model.latent_spatial;
  e << YAML::Key << "leaky_slope" << YAML::Value << c.model.leaky_slope;
  e << YAML::Key << "flow_input" << YAML::Value << flow_input_name(c.model.flow_input);
  e << YAML::EndMap;
  const auto& t = c.train;
  e << YAML::Key << "train" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "batch_size" << YAML::Value << t.batch_size;
  e << YAML::Key << "lr_initial" << YAML::Value << t.lr_initial;
  e << YAML::Key << "lr_halve_every" << YAML::Value << t.lr_halve_every;
  e << YAML::Key << "epochs" << YAML::Value << t.epochs;
  e << YAML::Key << "beta" << YAML::Value << t.beta;
  e << YAML::Key << "seed" << YAML::Value << t.seed;
  e << YAML::Key << "checkpoint_every" << YAML::Value << t.checkpoint_every;
  e << YAML::Key << "adam_beta1" << YAML::Value << t.adam_beta1;
  e << YAML::Key << "adam_beta2" << YAML::Value << t.adam_beta2;
  e << YAML::Key << "adam_epsilon" << YAML::Value << t.adam_epsilon;
  e << YAML::Key << "clip_gradients" << YAML::Value << t.clip_gradients;
  e << YAML::Key << "clip_norm" << YAML::Value << t.clip_norm;
  e << YAML::Key << "zero_noise" << YAML::Value << t.zero_noise;
  e << YAML::Key << "eps_motion" << YAML::Value << t.eps_motion;
  e << YAML::EndMap;
  const auto& s = c.score;
  e << YAML::Key << "score" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "timestep" << YAML::Value << s.timestep;
  e << YAML::Key << "sg_window" << YAML::Value << s.sg_window;
  e << YAML::Key << "sg_order" << YAML::Value << s.sg_order;
  e << YAML::Key << "order" << YAML::Value << smooth_order_name(s.order);
  e << YAML::Key << "attribution" << YAML::Value << attribution_name(s.attribution);
  e << YAML::Key << "batch_size" << YAML::Value << s.batch_size;
  e << YAML::Key << "maps" << YAML::Value << s.keep_maps;
  e << YAML::EndMap;
  e << YAML::Key << "eval" << YAML::Value << YAML::BeginMap << YAML::Key << "per_clip_average" << YAML::Value
    << c.eval.per_clip_average << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace f2v
