#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "f2v/core/errors.hpp"

namespace f2v::nn {

template <class T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Batched activations stored channel-major: element (c, b, y, x) lives at
// ((c * n + b) * h + y) * w + x, so the tensor is a (c) x (n*h*w) matrix.
template <class T>
struct Tensor {
  int c = 0;
  int n = 0;
  int h = 0;
  int w = 0;
  std::vector<T> data;

  Tensor() = default;
  Tensor(int channels, int batch, int height, int width, T fill = T(0))
      : c(channels), n(batch), h(height), w(width),
        data(static_cast<std::size_t>(channels) * batch * height * width, fill) {}

  std::size_t plane() const { return static_cast<std::size_t>(n) * h * w; }
  std::size_t image_size() const { return static_cast<std::size_t>(h) * w; }
  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor& o) const { return c == o.c && n == o.n && h == o.h && w == o.w; }
  std::string shape_string() const {
    return std::to_string(c) + "x" + std::to_string(n) + "x" + std::to_string(h) + "x" + std::to_string(w);
  }

  T* channel(int ci) { return data.data() + static_cast<std::size_t>(ci) * plane(); }
  const T* channel(int ci) const { return data.data() + static_cast<std::size_t>(ci) * plane(); }
  T& at(int ci, int b, int y, int x) {
    return data[((static_cast<std::size_t>(ci) * n + b) * h + y) * w + x];
  }
  T at(int ci, int b, int y, int x) const {
    return data[((static_cast<std::size_t>(ci) * n + b) * h + y) * w + x];
  }

  Eigen::Map<RowMatrix<T>> mat() { return {data.data(), c, static_cast<Eigen::Index>(plane())}; }
  Eigen::Map<const RowMatrix<T>> mat() const { return {data.data(), c, static_cast<Eigen::Index>(plane())}; }
};

template <class T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.n != b.n || a.h != b.h || a.w != b.w) {
    throw ShapeError("cannot concatenate " + a.shape_string() + " with " + b.shape_string());
  }
  Tensor<T> out(a.c + b.c, a.n, a.h, a.w);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

/// Inverse of concat_channels: the first `first_channels` go to `head`.
template <class T>
void split_channels(const Tensor<T>& src, int first_channels, Tensor<T>& head, Tensor<T>& tail) {
  head = Tensor<T>(first_channels, src.n, src.h, src.w);
  tail = Tensor<T>(src.c - first_channels, src.n, src.h, src.w);
  const auto split = src.data.begin() + static_cast<std::ptrdiff_t>(head.size());
  std::copy(src.data.begin(), split, head.data.begin());
  std::copy(split, src.data.end(), tail.data.begin());
}

}  // namespace f2v::nn
