#include "f2v/synth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "f2v/core/errors.hpp"
#include "f2v/core/rng.hpp"

namespace f2v {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::int64_t kOne = 256;  // trajectory fixed point: 1/256 px

std::int64_t to_fixed(double px) { return static_cast<std::int64_t>(std::llround(px * kOne)); }

// Floor after half-pixel offset; positions are never negative.
int to_pixel(std::int64_t fp) { return static_cast<int>((fp + kOne / 2) / kOne); }

int half_extent(double size_px) { return std::max(0, static_cast<int>(std::floor(size_px / 2.0))); }

int lane_center(int lane, int lanes, int size) {
  return static_cast<int>(std::floor(static_cast<double>(size) * (2 * lane + 1) / (2.0 * lanes) + 0.5));
}

struct Mover {
  AgentSpec spec;
  int axis = 0;  // 0: moves along x, 1: along y
  int cross = 0;
  std::int64_t pos = 0;
  int sign = 1;
  int visible_from = 0;
  bool anomalous = false;
};

std::string clip_name(const std::string& prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%04d", index);
  return prefix + buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

const char* shape_name(Shape s) { return s == Shape::disk ? "disk" : "square"; }

const char* anomaly_name(AnomalyKind k) {
  switch (k) {
    case AnomalyKind::novel_class: return "novel_class";
    case AnomalyKind::fast_motion: return "fast_motion";
    case AnomalyKind::wrong_direction: return "wrong_direction";
  }
  return "?";
}

AnomalyKind parse_anomaly(const std::string& name) {
  if (name == "novel_class") return AnomalyKind::novel_class;
  if (name == "fast_motion") return AnomalyKind::fast_motion;
  if (name == "wrong_direction") return AnomalyKind::wrong_direction;
  throw ScriptError("unknown anomaly kind '" + name + "'");
}

void SceneScript::validate() const {
  const std::string where = "script '" + name + "': ";
  if (num_clips < 0) throw ScriptError(where + "num_clips must be >= 0");
  if (frames_per_clip < 2) throw ScriptError(where + "frames_per_clip must be >= 2");
  if (image_size < 8) throw ScriptError(where + "image_size must be >= 8");
  if (lanes < 1) throw ScriptError(where + "lanes must be >= 1");
  if (min_agents < 1 || max_agents < min_agents || max_agents > lanes) {
    throw ScriptError(where + "need 1 <= min_agents <= max_agents <= lanes");
  }
  if (agents.empty()) throw ScriptError(where + "agent catalog is empty");
  const double lane_width = static_cast<double>(image_size) / lanes;
  auto check_agent = [&](const AgentSpec& a) {
    if (!(a.speed_px_per_frame > 0.0)) throw ScriptError(where + "agent speeds must be > 0");
    if (!(a.size_px >= 1.0)) throw ScriptError(where + "agent size must be >= 1 px");
    if (2 * half_extent(a.size_px) + 1 >= lane_width) {
      throw ScriptError(where + "agent of size " + std::to_string(a.size_px) + " does not fit a lane");
    }
  };
  for (const auto& a : agents) check_agent(a);
  if (anomaly_spec) {
    const auto& an = *anomaly_spec;
    if (an.onset_frame < 1 || an.onset_frame >= frames_per_clip) {
      throw ScriptError(where + "onset_frame must be in [1, frames_per_clip)");
    }
    if (an.agent_index < 0) throw ScriptError(where + "agent_index must be >= 0");
    if (an.kind == AnomalyKind::novel_class) {
      check_agent(an.novel_agent);
      if (max_agents >= lanes) throw ScriptError(where + "novel_class needs a free lane (max_agents < lanes)");
    }
    if (an.kind == AnomalyKind::fast_motion && !(an.speed_factor > 0.0)) {
      throw ScriptError(where + "speed_factor must be > 0");
    }
  }
}

void Benchmark::validate() const {
  if (train.anomaly_spec) throw ScriptError("training script '" + train.name + "' contains an anomaly");
  std::set<int> train_classes;
  for (const auto& a : train.agents) train_classes.insert(a.class_id);
  std::set<std::string> names{train.name};
  train.validate();
  for (const auto& s : test) {
    s.validate();
    if (!names.insert(s.name).second) throw ScriptError("duplicate script name '" + s.name + "'");
    if (s.image_size != train.image_size) throw ScriptError("script '" + s.name + "' has a different image_size");
    if (s.anomaly_spec && s.anomaly_spec->kind == AnomalyKind::novel_class &&
        train_classes.count(s.anomaly_spec->novel_agent.class_id)) {
      throw ScriptError("script '" + s.name + "': novel class " +
                        std::to_string(s.anomaly_spec->novel_agent.class_id) + " appears in training");
    }
  }
  auto check_palette = [&](const SceneScript& s) {
    for (const auto& a : s.agents) {
      if (!palette.contains(a.class_id)) throw ScriptError("class " + std::to_string(a.class_id) + " not in palette");
    }
    if (s.anomaly_spec && !palette.contains(s.anomaly_spec->novel_agent.class_id)) {
      throw ScriptError("class " + std::to_string(s.anomaly_spec->novel_agent.class_id) + " not in palette");
    }
  };
  check_palette(train);
  for (const auto& s : test) check_palette(s);
}

Benchmark default_benchmark(std::uint64_t seed, int image_size) {
  const double k = image_size / 64.0;
  const std::vector<AgentSpec> catalog{
      {1, Shape::disk, 7.0 * k, 1.0 * k, HeadingPolicy::lane},    // person
      {2, Shape::disk, 9.0 * k, 1.0 * k, HeadingPolicy::lane},    // bicycle
      {3, Shape::square, 9.0 * k, 1.0 * k, HeadingPolicy::lane},  // car
  };
  auto script = [&](std::string name, int clips, std::uint64_t stream) {
    SceneScript s;
    s.name = std::move(name);
    s.seed = derive_seed(seed, stream);
    s.num_clips = clips;
    s.frames_per_clip = 40;
    s.image_size = image_size;
    s.agents = catalog;
    return s;
  };
  Benchmark b;
  b.seed = seed;
  b.train = script("train", 64, 1);
  b.test.push_back(script("normal", 8, 2));
  SceneScript novel = script("novel_class", 4, 3);
  novel.anomaly_spec = AnomalySpec{};
  novel.anomaly_spec->kind = AnomalyKind::novel_class;
  novel.anomaly_spec->novel_agent = {4, Shape::square, 7.0 * k, 1.0 * k, HeadingPolicy::lane};  // cart
  novel.max_agents = 3;
  b.test.push_back(novel);
  SceneScript fast = script("fast_motion", 2, 4);
  fast.anomaly_spec = AnomalySpec{};
  fast.anomaly_spec->kind = AnomalyKind::fast_motion;
  b.test.push_back(fast);
  SceneScript wrong = script("wrong_direction", 2, 5);
  wrong.anomaly_spec = AnomalySpec{};
  wrong.anomaly_spec->kind = AnomalyKind::wrong_direction;
  b.test.push_back(wrong);
  return b;
}

bool covers(const Placement& p, int x, int y) {
  if (!p.visible) return false;
  const int dx = x - p.cx;
  const int dy = y - p.cy;
  if (p.shape == Shape::square) return std::abs(dx) <= p.half && std::abs(dy) <= p.half;
  return dx * dx + dy * dy <= p.half * p.half + p.half;
}

ClassMap render_class_map(const std::vector<Placement>& agents, int height, int width) {
  ClassMap map(height, width, 0);
  for (const auto& p : agents) {
    if (!p.visible) continue;
    for (int y = std::max(0, p.cy - p.half); y <= std::min(height - 1, p.cy + p.half); ++y) {
      for (int x = std::max(0, p.cx - p.half); x <= std::min(width - 1, p.cx + p.half); ++x) {
        if (covers(p, x, y)) map.at(y, x) = p.class_id;
      }
    }
  }
  return map;
}

FlowField analytic_flow(const std::vector<Placement>& now, const std::vector<Placement>& next, int height,
                        int width) {
  if (now.size() != next.size()) throw ScriptError("agent count changes between frames");
  FlowField flow(height, width);
  std::vector<int> owner(static_cast<std::size_t>(height) * width, -1);
  for (std::size_t i = 0; i < now.size(); ++i) {
    const Placement& p = now[i];
    if (!p.visible) continue;
    const auto du = static_cast<float>(next[i].cx - p.cx);
    const auto dv = static_cast<float>(next[i].cy - p.cy);
    for (int y = std::max(0, p.cy - p.half); y <= std::min(height - 1, p.cy + p.half); ++y) {
      for (int x = std::max(0, p.cx - p.half); x <= std::min(width - 1, p.cx + p.half); ++x) {
        if (!covers(p, x, y)) continue;
        const std::size_t idx = static_cast<std::size_t>(y) * width + x;
        if (owner[idx] >= 0) {
          throw ScriptError("agents " + std::to_string(owner[idx]) + " and " + std::to_string(i) +
                            " overlap at pixel (" + std::to_string(x) + ", " + std::to_string(y) + ")");
        }
        owner[idx] = static_cast<int>(i);
        flow.u[idx] = du;
        flow.v[idx] = dv;
      }
    }
  }
  return flow;
}

ClipTrajectory plan_clip(const SceneScript& script, int clip_index) {
  script.validate();
  Rng rng(derive_seed(script.seed, static_cast<std::uint64_t>(clip_index)));
  const int size = script.image_size;
  const int frames = script.frames_per_clip;
  const int axis = static_cast<int>(rng.uniform_int(0, 1));
  const int count = static_cast<int>(rng.uniform_int(script.min_agents, script.max_agents));
  std::vector<int> lanes(static_cast<std::size_t>(script.lanes));
  for (int i = 0; i < script.lanes; ++i) lanes[static_cast<std::size_t>(i)] = i;
  rng.shuffle(lanes);

  auto place = [&](const AgentSpec& spec, int lane, int start_frame) {
    Mover m;
    m.spec = spec;
    m.axis = axis;
    m.cross = lane_center(lane, script.lanes, size);
    m.visible_from = start_frame;
    m.sign = spec.heading == HeadingPolicy::lane ? (lane % 2 == 0 ? 1 : -1)
                                                 : (rng.uniform_int(0, 1) == 0 ? 1 : -1);
    const int half = half_extent(spec.size_px);
    const int lo = half;
    const int hi = size - 1 - half;
    const auto travel = static_cast<int>(std::ceil(spec.speed_px_per_frame * (frames - 1 - start_frame)));
    int a = lo;
    int b = hi;
    if (m.sign > 0) b = std::max(lo, hi - travel);
    else a = std::min(hi, lo + travel);
    m.pos = rng.uniform_int(a, b) * kOne;
    return m;
  };

  std::vector<Mover> movers;
  for (int i = 0; i < count; ++i) {
    const auto& spec = script.agents[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(script.agents.size()) - 1))];
    movers.push_back(place(spec, lanes[static_cast<std::size_t>(i)], 0));
  }

  ClipTrajectory traj;
  int first = frames;
  if (script.anomaly_spec) {
    const AnomalySpec& an = *script.anomaly_spec;
    first = an.onset_frame - 1;
    traj.first_anomalous = first;
    if (an.kind == AnomalyKind::novel_class) {
      Mover m = place(an.novel_agent, lanes[static_cast<std::size_t>(count)], first);
      m.anomalous = true;
      movers.push_back(m);
    } else {
      movers[static_cast<std::size_t>(an.agent_index % count)].anomalous = true;
    }
  }

  traj.frames.resize(static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) {
    auto& row = traj.frames[static_cast<std::size_t>(t)];
    for (auto& m : movers) {
      if (t > 0) {
        std::int64_t speed = to_fixed(m.spec.speed_px_per_frame);
        if (m.anomalous && t >= first && script.anomaly_spec) {
          const AnomalySpec& an = *script.anomaly_spec;
          if (an.kind == AnomalyKind::fast_motion) speed = to_fixed(m.spec.speed_px_per_frame * an.speed_factor);
          if (an.kind == AnomalyKind::wrong_direction && t == first) m.sign = -m.sign;
        }
        const int half = half_extent(m.spec.size_px);
        const std::int64_t lo = static_cast<std::int64_t>(half) * kOne;
        const std::int64_t hi = static_cast<std::int64_t>(size - 1 - half) * kOne;
        if (t > m.visible_from) {
          m.pos += m.sign * speed;
          // reflect at the walls
          for (int bounce = 0; bounce < 8 && (m.pos > hi || m.pos < lo); ++bounce) {
            if (m.pos > hi) m.pos = 2 * hi - m.pos;
            if (m.pos < lo) m.pos = 2 * lo - m.pos;
            m.sign = -m.sign;
          }
        }
      }
      Placement p;
      p.class_id = m.spec.class_id;
      p.shape = m.spec.shape;
      p.half = half_extent(m.spec.size_px);
      const int along = to_pixel(m.pos);
      p.cx = m.axis == 0 ? along : m.cross;
      p.cy = m.axis == 0 ? m.cross : along;
      p.visible = t >= m.visible_from;
      row.push_back(p);
    }
  }
  return traj;
}

Clip synthesize_clip(const SceneScript& script, int clip_index, const ClassPalette& palette, bool labelled) {
  const ClipTrajectory traj = plan_clip(script, clip_index);
  const int size = script.image_size;
  Clip clip;
  clip.clip_id = clip_name(script.name, clip_index);
  for (std::size_t t = 0; t < traj.frames.size(); ++t) {
    clip.frames.push_back(colorize(render_class_map(traj.frames[t], size, size), palette, static_cast<int>(t)));
    if (t + 1 < traj.frames.size()) clip.flows.push_back(analytic_flow(traj.frames[t], traj.frames[t + 1], size, size));
  }
  if (labelled) {
    std::vector<int> labels(traj.frames.size(), 0);
    if (traj.first_anomalous) {
      std::fill(labels.begin() + *traj.first_anomalous, labels.end(), 1);
    }
    clip.labels = std::move(labels);
  }
  return clip;
}

Manifest gen_dataset(const Benchmark& bench, const fs::path& root, bool force) {
  bench.validate();
  if (fs::exists(root) && !fs::is_empty(root)) {
    if (!force) throw OverwriteError(root.string() + " is not empty (use force to overwrite)");
    for (const char* entry : {"train", "test", "palette.json", "manifest.json"}) fs::remove_all(root / entry);
  }
  fs::create_directories(root);
  write_palette_json(root / "palette.json", bench.palette);

  Manifest manifest;
  manifest.seed = bench.seed;
  manifest.image_size = bench.train.image_size;
  auto emit = [&](const SceneScript& script, Split split) {
    for (int i = 0; i < script.num_clips; ++i) {
      const Clip clip = synthesize_clip(script, i, bench.palette, split == Split::test);
      write_clip(root, split, clip);
      ManifestClip mc;
      mc.clip_id = clip.clip_id;
      mc.split = split;
      mc.num_frames = clip.num_frames();
      if (script.anomaly_spec) {
        mc.anomaly = script.anomaly_spec->kind;
        mc.anomaly_frames = std::make_pair(script.anomaly_spec->onset_frame - 1, clip.num_frames() - 1);
      }
      mc.checksum = clip_checksum(clip);
      manifest.num_frames += mc.num_frames;
      manifest.clips.push_back(mc);
    }
  };
  emit(bench.train, Split::train);
  for (const auto& s : bench.test) emit(s, Split::test);
  manifest.num_clips = static_cast<int>(manifest.clips.size());
  write_manifest_json(root / "manifest.json", manifest);
  return manifest;
}

void write_manifest_json(const fs::path& path, const Manifest& m) {
  json doc;
  doc["seed"] = m.seed;
  doc["image_size"] = m.image_size;
  doc["num_clips"] = m.num_clips;
  doc["num_frames"] = m.num_frames;
  doc["clips"] = json::array();
  for (const auto& c : m.clips) {
    json j{{"clip_id", c.clip_id}, {"split", split_name(c.split)}, {"num_frames", c.num_frames},
           {"checksum", hex64(c.checksum)}};
    j["anomaly"] = c.anomaly ? json(anomaly_name(*c.anomaly)) : json(nullptr);
    j["anomaly_frames"] = c.anomaly_frames ? json::array({c.anomaly_frames->first, c.anomaly_frames->second})
                                           : json(nullptr);
    doc["clips"].push_back(j);
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

Manifest read_manifest_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  try {
    const json doc = json::parse(in);
    Manifest m;
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.image_size = doc.at("image_size").get<int>();
    m.num_clips = doc.at("num_clips").get<int>();
    m.num_frames = doc.at("num_frames").get<int>();
    for (const auto& j : doc.at("clips")) {
      ManifestClip c;
      c.clip_id = j.at("clip_id").get<std::string>();
      c.split = parse_split(j.at("split").get<std::string>());
      c.num_frames = j.at("num_frames").get<int>();
      c.checksum = std::stoull(j.at("checksum").get<std::string>(), nullptr, 16);
      if (!j.at("anomaly").is_null()) c.anomaly = parse_anomaly(j["anomaly"].get<std::string>());
      if (!j.at("anomaly_frames").is_null()) {
        c.anomaly_frames = std::make_pair(j["anomaly_frames"][0].get<int>(), j["anomaly_frames"][1].get<int>());
      }
      m.clips.push_back(c);
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace f2v
