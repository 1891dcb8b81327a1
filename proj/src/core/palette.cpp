#include "f2v/core/palette.hpp"

#include <limits>
#include <set>
#include <string>

#include "f2v/core/errors.hpp"

namespace f2v {

ClassPalette::ClassPalette(std::vector<PaletteEntry> entries) : entries_(std::move(entries)) {
  if (entries_.size() < 2) {
    throw ConfigError("palette needs at least 2 entries, got " + std::to_string(entries_.size()));
  }
  std::set<int> ids;
  std::set<Color> colors;
  bool has_background = false;
  for (const auto& e : entries_) {
    for (float c : e.color) {
      if (!(c >= 0.0f && c <= 1.0f)) {
        throw ConfigError("palette color for class " + std::to_string(e.class_id) + " outside [0,1]");
      }
    }
    if (!ids.insert(e.class_id).second) {
      throw ConfigError("duplicate palette class_id " + std::to_string(e.class_id));
    }
    if (!colors.insert(e.color).second) {
      throw ConfigError("palette color for class " + std::to_string(e.class_id) + " is not unique");
    }
    if (e.class_id == 0) {
      has_background = true;
      if (e.color != Color{0.0f, 0.0f, 0.0f}) throw ConfigError("background class 0 must be black");
    }
  }
  if (!has_background) throw ConfigError("palette has no background class 0");
}

ClassPalette ClassPalette::default_palette() {
  return ClassPalette({
      {0, "background", {0.0f, 0.0f, 0.0f}},
      {1, "person", {0.0f, 1.0f, 0.0f}},
      {2, "bicycle", {1.0f, 0.0f, 0.0f}},
      {3, "car", {0.0f, 0.0f, 1.0f}},
      {4, "cart", {1.0f, 1.0f, 0.0f}},
      {5, "skater", {1.0f, 0.0f, 1.0f}},
      {6, "animal", {0.0f, 1.0f, 1.0f}},
      {7, "drone", {1.0f, 1.0f, 1.0f}},
  });
}

bool ClassPalette::contains(int class_id) const {
  for (const auto& e : entries_) {
    if (e.class_id == class_id) return true;
  }
  return false;
}

const PaletteEntry& ClassPalette::entry(int class_id) const {
  for (const auto& e : entries_) {
    if (e.class_id == class_id) return e;
  }
  throw PaletteMissError("class_id " + std::to_string(class_id) + " is not in the palette");
}

const PaletteEntry& ClassPalette::by_name(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.class_name == name) return e;
  }
  throw PaletteMissError("class '" + name + "' is not in the palette");
}

std::size_t ClassPalette::nearest(const Color& color) const {
  std::size_t best = 0;
  float best_d = std::numeric_limits<float>::infinity();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    float d = 0.0f;
    for (int c = 0; c < 3; ++c) {
      const float diff = entries_[i].color[c] - color[c];
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

SemanticFrame colorize(const ClassMap& class_map, const ClassPalette& palette, int frame_index) {
  std::set<int> missing;
  for (int id : class_map.ids) {
    if (!palette.contains(id)) missing.insert(id);
  }
  if (!missing.empty()) {
    std::string list;
    for (int id : missing) list += (list.empty() ? "" : ", ") + std::to_string(id);
    throw PaletteMissError("class_id(s) not in palette: " + list);
  }

  SemanticFrame frame;
  frame.frame_index = frame_index;
  frame.image = Image(3, class_map.height, class_map.width);
  for (int y = 0; y < class_map.height; ++y) {
    for (int x = 0; x < class_map.width; ++x) {
      const Color& c = palette.entry(class_map.at(y, x)).color;
      for (int ch = 0; ch < 3; ++ch) frame.image.at(ch, y, x) = c[ch];
    }
  }
  return frame;
}

ClassMap decode_classes(const Image& image, const ClassPalette& palette) {
  if (image.channels != 3) throw ShapeError("decode expects 3 channels, got " + std::to_string(image.channels));
  ClassMap map(image.height, image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const Color c{image.at(0, y, x), image.at(1, y, x), image.at(2, y, x)};
      map.at(y, x) = palette.entries()[palette.nearest(c)].class_id;
    }
  }
  return map;
}

}  // namespace f2v
