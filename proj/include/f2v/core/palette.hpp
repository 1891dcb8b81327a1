#pragma once

#include <string>
#include <vector>

#include "f2v/core/types.hpp"

namespace f2v {

struct PaletteEntry {
  int class_id = 0;
  std::string class_name;
  Color color{0.0f, 0.0f, 0.0f};
};

// Ordered class -> color table. Class 0 is background and must be black.
class ClassPalette {
 public:
  ClassPalette() = default;
  explicit ClassPalette(std::vector<PaletteEntry> entries);

  /// Background, person, bicycle, car and four synthetic classes.
  static ClassPalette default_palette();

  const std::vector<PaletteEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(int class_id) const;
  const PaletteEntry& entry(int class_id) const;
  const PaletteEntry& by_name(const std::string& name) const;

  /// Index into entries() of the color closest (L2) to `color`.
  std::size_t nearest(const Color& color) const;

 private:
  std::vector<PaletteEntry> entries_;
};

SemanticFrame colorize(const ClassMap& class_map, const ClassPalette& palette, int frame_index = 0);

/// Nearest-palette-color decode of a (ground truth or predicted) frame.
ClassMap decode_classes(const Image& image, const ClassPalette& palette);

}  // namespace f2v
