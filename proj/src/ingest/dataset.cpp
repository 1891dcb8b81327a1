#include "f2v/ingest/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "f2v/core/errors.hpp"
#include "f2v/ingest/flo.hpp"
#include "f2v/ingest/image_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace f2v {
namespace {

std::string frame_name(int index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06d%s", index, ext);
  return buf;
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& ext) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

Clip load_clip(const fs::path& dir, Split split, int target_size) {
  Clip clip;
  clip.clip_id = dir.filename().string();
  const auto where = [&](const std::string& what) { return "clip '" + clip.clip_id + "': " + what; };

  const auto pngs = sorted_files(dir / "semantic", ".png");
  if (pngs.empty()) throw LoadError(where("no frames in " + (dir / "semantic").string()));
  std::vector<std::pair<int, int>> native_sizes;
  for (std::size_t i = 0; i < pngs.size(); ++i) {
    if (pngs[i].filename() != frame_name(static_cast<int>(i), ".png")) {
      throw LoadError(where("frame files not contiguous from 0: unexpected " + pngs[i].filename().string()));
    }
    SemanticFrame frame{read_png_rgb(pngs[i]), static_cast<int>(i)};
    native_sizes.emplace_back(frame.height(), frame.width());
    if (frame.height() != target_size || frame.width() != target_size) {
      frame = resize_nearest(frame, target_size, target_size);
    }
    clip.frames.push_back(std::move(frame));
  }

  const auto flos = sorted_files(dir / "flow", ".flo");
  if (flos.size() + 1 != pngs.size()) {
    throw LoadError(where("expected " + std::to_string(pngs.size() - 1) + " flow files, found " +
                          std::to_string(flos.size())));
  }
  for (std::size_t i = 0; i + 1 < pngs.size(); ++i) {
    const fs::path expected = dir / "flow" / frame_name(static_cast<int>(i), ".flo");
    if (flos[i] != expected) throw LoadError(where("missing flow file " + expected.string()));
    FlowField flow;
    try {
      flow = read_flo(expected);
    } catch (const FormatError& e) {
      throw LoadError(where(e.what()));
    }
    const int src_h = flow.height;
    const int src_w = flow.width;
    // Flow must match its source frame before resizing.
    const auto [frame_h, frame_w] = native_sizes[i];
    if (src_h != frame_h || src_w != frame_w) {
      throw LoadError(where("flow " + expected.filename().string() + " is " + std::to_string(src_w) + "x" +
                            std::to_string(src_h) + " but its frame is " + std::to_string(frame_w) + "x" +
                            std::to_string(frame_h)));
    }
    if (src_h != target_size || src_w != target_size) flow = resize_flow_bilinear(flow, target_size, target_size);
    clip.flows.push_back(std::move(flow));
  }

  const fs::path labels_path = dir / "labels.csv";
  if (split == Split::test) {
    if (!fs::exists(labels_path)) throw LoadError(where("test clip has no labels.csv"));
    try {
      clip.labels = read_labels_csv(labels_path);
    } catch (const FormatError& e) {
      throw LoadError(where(e.what()));
    }
    if (clip.labels->size() != clip.frames.size()) {
      throw LoadError(where("labels.csv has " + std::to_string(clip.labels->size()) + " rows for " +
                            std::to_string(clip.frames.size()) + " frames"));
    }
  }
  clip.validate();
  return clip;
}

void fnv_mix(std::uint64_t& h, std::uint8_t byte) {
  h ^= byte;
  h *= 1099511628211ull;
}

void fnv_mix_u32(std::uint64_t& h, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) fnv_mix(h, static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

const char* split_name(Split split) { return split == Split::train ? "train" : "test"; }

Split parse_split(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "test") return Split::test;
  throw ConfigError("unknown split '" + name + "' (expected train or test)");
}

void Clip::validate() const {
  const auto fail = [&](const std::string& what) { throw LoadError("clip '" + clip_id + "': " + what); };
  if (frames.empty()) fail("no frames");
  if (flows.size() + 1 != frames.size()) fail("flow count must be frame count - 1");
  const int h = frames.front().height();
  const int w = frames.front().width();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].frame_index != static_cast<int>(i)) fail("frame indices are not contiguous from 0");
    if (frames[i].height() != h || frames[i].width() != w || frames[i].image.channels != 3) {
      fail("frame " + std::to_string(i) + " has inconsistent dimensions");
    }
  }
  for (std::size_t i = 0; i < flows.size(); ++i) {
    if (flows[i].height != h || flows[i].width != w) fail("flow " + std::to_string(i) + " does not match frame size");
  }
  if (labels) {
    if (labels->size() != frames.size()) fail("label count does not match frame count");
    for (int l : *labels) {
      if (l != 0 && l != 1) fail("labels must be 0 or 1");
    }
  }
}

ClipDataset load_dataset(const fs::path& root, Split split, int target_size) {
  if (target_size <= 0) throw ConfigError("target_size must be positive");
  ClipDataset ds;
  ds.split = split;
  ds.palette = read_palette_json(root / "palette.json");

  const fs::path split_dir = root / split_name(split);
  if (!fs::is_directory(split_dir)) throw LoadError("missing split directory " + split_dir.string());
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(split_dir)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) ds.clips.push_back(load_clip(dir, split, target_size));
  return ds;
}

ClassPalette read_palette_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open palette " + path.string());
  std::vector<PaletteEntry> entries;
  try {
    const json doc = json::parse(in);
    for (const auto& item : doc) {
      PaletteEntry e;
      e.class_id = item.at("class_id").get<int>();
      e.class_name = item.at("class_name").get<std::string>();
      const auto rgb = item.at("color").get<std::vector<int>>();
      if (rgb.size() != 3) throw LoadError(path.string() + ": color needs 3 components");
      for (int c = 0; c < 3; ++c) {
        if (rgb[c] < 0 || rgb[c] > 255) throw LoadError(path.string() + ": color component out of 0-255");
        e.color[c] = static_cast<float>(rgb[c]) / 255.0f;
      }
      entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
  try {
    return ClassPalette(std::move(entries));
  } catch (const ConfigError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

void write_palette_json(const fs::path& path, const ClassPalette& palette) {
  json doc = json::array();
  for (const auto& e : palette.entries()) {
    doc.push_back({{"class_id", e.class_id},
                   {"class_name", e.class_name},
                   {"color", {to_byte(e.color[0]), to_byte(e.color[1]), to_byte(e.color[2])}}});
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

std::vector<int> read_labels_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("frame_index,label", 0) != 0) {
    throw FormatError(path.string() + ": expected header 'frame_index,label'");
  }
  std::vector<int> labels;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    int index = -1;
    int label = -1;
    char comma = 0;
    std::string rest;
    if (!(ss >> index >> comma >> label) || comma != ',' || (ss >> rest)) {
      throw FormatError(path.string() + ": malformed row " + std::to_string(row) + " '" + line + "'");
    }
    if (index != static_cast<int>(labels.size())) {
      throw FormatError(path.string() + ": row " + std::to_string(row) + " has frame_index " +
                        std::to_string(index) + ", expected " + std::to_string(labels.size()));
    }
    if (label != 0 && label != 1) {
      throw FormatError(path.string() + ": row " + std::to_string(row) + " label must be 0 or 1");
    }
    labels.push_back(label);
  }
  return labels;
}

void write_labels_csv(const fs::path& path, const std::vector<int>& labels) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "frame_index,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << "," << labels[i] << "\n";
}

void write_clip(const fs::path& root, Split split, const Clip& clip) {
  clip.validate();
  const fs::path dir = root / split_name(split) / clip.clip_id;
  fs::create_directories(dir / "semantic");
  fs::create_directories(dir / "flow");
  for (const auto& frame : clip.frames) {
    write_png_rgb(dir / "semantic" / frame_name(frame.frame_index, ".png"), frame.image);
  }
  for (std::size_t i = 0; i < clip.flows.size(); ++i) {
    write_flo(dir / "flow" / frame_name(static_cast<int>(i), ".flo"), clip.flows[i]);
  }
  if (clip.labels) write_labels_csv(dir / "labels.csv", *clip.labels);
}

SemanticFrame resize_nearest(const SemanticFrame& frame, int height, int width) {
  const Image& src = frame.image;
  SemanticFrame out;
  out.frame_index = frame.frame_index;
  out.image = Image(src.channels, height, width);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(src.height - 1, static_cast<int>((y + 0.5) * src.height / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(src.width - 1, static_cast<int>((x + 0.5) * src.width / width));
      for (int c = 0; c < src.channels; ++c) out.image.at(c, y, x) = src.at(c, sy, sx);
    }
  }
  return out;
}

FlowField resize_flow_bilinear(const FlowField& flow, int height, int width) {
  FlowField out(height, width);
  const double sy_scale = static_cast<double>(flow.height) / height;
  const double sx_scale = static_cast<double>(flow.width) / width;
  const float u_scale = static_cast<float>(static_cast<double>(width) / flow.width);
  const float v_scale = static_cast<float>(static_cast<double>(height) / flow.height);
  const auto sample = [&](const std::vector<float>& plane, double fy, double fx) {
    fy = std::clamp(fy, 0.0, static_cast<double>(flow.height - 1));
    fx = std::clamp(fx, 0.0, static_cast<double>(flow.width - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int x0 = static_cast<int>(std::floor(fx));
    const int y1 = std::min(y0 + 1, flow.height - 1);
    const int x1 = std::min(x0 + 1, flow.width - 1);
    const double wy = fy - y0;
    const double wx = fx - x0;
    const auto at = [&](int y, int x) { return static_cast<double>(plane[static_cast<std::size_t>(y) * flow.width + x]); };
    return (1 - wy) * ((1 - wx) * at(y0, x0) + wx * at(y0, x1)) + wy * ((1 - wx) * at(y1, x0) + wx * at(y1, x1));
  };
  for (int y = 0; y < height; ++y) {
    const double fy = (y + 0.5) * sy_scale - 0.5;
    for (int x = 0; x < width; ++x) {
      const double fx = (x + 0.5) * sx_scale - 0.5;
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      out.u[i] = static_cast<float>(sample(flow.u, fy, fx)) * u_scale;
      out.v[i] = static_cast<float>(sample(flow.v, fy, fx)) * v_scale;
    }
  }
  return out;
}

std::uint64_t clip_checksum(const Clip& clip) {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : clip.clip_id) fnv_mix(h, static_cast<std::uint8_t>(c));
  for (const auto& frame : clip.frames) {
    fnv_mix_u32(h, static_cast<std::uint32_t>(frame.height()));
    fnv_mix_u32(h, static_cast<std::uint32_t>(frame.width()));
    for (float v : frame.image.data) fnv_mix(h, to_byte(v));
  }
  for (const auto& flow : clip.flows) {
    for (std::size_t i = 0; i < flow.size(); ++i) {
      fnv_mix_u32(h, std::bit_cast<std::uint32_t>(flow.u[i]));
      fnv_mix_u32(h, std::bit_cast<std::uint32_t>(flow.v[i]));
    }
  }
  if (clip.labels) {
    for (int l : *clip.labels) fnv_mix(h, static_cast<std::uint8_t>(l));
  }
  return h;
}

}  // namespace f2v
