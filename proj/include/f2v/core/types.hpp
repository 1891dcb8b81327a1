#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace f2v {

// Planar image, value(c, y, x) = data[(c * height + y) * width + x].
struct Image {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  Image() = default;
  Image(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, fill) {}

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
  float& at(int c, int y, int x) { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  float at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  friend bool operator==(const Image&, const Image&) = default;
};

// A rendered semantic map: 3 color channels in [0, 1].
struct SemanticFrame {
  Image image;
  int frame_index = 0;

  int height() const { return image.height; }
  int width() const { return image.width; }
  friend bool operator==(const SemanticFrame&, const SemanticFrame&) = default;
};

// Per-pixel displacement (pixels/frame) from one frame to the next.
struct FlowField {
  int height = 0;
  int width = 0;
  std::vector<float> u;
  std::vector<float> v;

  FlowField() = default;
  FlowField(int h, int w, float fu = 0.0f, float fv = 0.0f)
      : height(h), width(w), u(static_cast<std::size_t>(h) * w, fu), v(static_cast<std::size_t>(h) * w, fv) {}
  std::size_t size() const { return u.size(); }
  friend bool operator==(const FlowField&, const FlowField&) = default;
};

struct PolarFlow {
  int height = 0;
  int width = 0;
  std::vector<float> magnitude;
  std::vector<float> angle;  // radians in (-pi, pi]
};

// (|cos angle|, |sin angle|) per pixel, zero where the pixel is static.
struct DirectionMap {
  int height = 0;
  int width = 0;
  std::vector<float> c0;
  std::vector<float> c1;
};

// Per-pixel class ids.
struct ClassMap {
  int height = 0;
  int width = 0;
  std::vector<int> ids;

  ClassMap() = default;
  ClassMap(int h, int w, int fill = 0) : height(h), width(w), ids(static_cast<std::size_t>(h) * w, fill) {}
  int& at(int y, int x) { return ids[static_cast<std::size_t>(y) * width + x]; }
  int at(int y, int x) const { return ids[static_cast<std::size_t>(y) * width + x]; }
  friend bool operator==(const ClassMap&, const ClassMap&) = default;
};

struct VideoTensor {
  std::vector<Image> frames;

  int num_frames() const { return static_cast<int>(frames.size()); }
};

using Color = std::array<float, 3>;

}  // namespace f2v
