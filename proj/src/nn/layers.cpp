#include "f2v/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace f2v::nn {
namespace {

int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

// Output columns [lo, hi) whose tap kx lands inside [0, w).
std::pair<int, int> valid_range(int w, int out_w, int stride, int pad, int kx) {
  const int lo = std::max(0, -floor_div(kx - pad, stride));
  const int hi = std::min(out_w, floor_div(w - 1 + pad - kx, stride) + 1);
  return {lo, hi};
}

// Per-thread reusable buffers for column matrices; fresh multi-megabyte
// allocations per layer call were dominated by page faults.
template <class T>
Eigen::Map<RowMatrix<T>> scratch(int slot, Eigen::Index rows, Eigen::Index cols) {
  thread_local std::vector<T> buffers[2];
  auto& buf = buffers[slot];
  const auto need = static_cast<std::size_t>(rows * cols);
  if (buf.size() < need) buf.resize(need);
  return {buf.data(), rows, cols};
}

template <class T>
void im2col_into(const Tensor<T>& x, int stride, int pad, int out_h, int out_w, T* out);

template <class T>
Tensor<T> col2im_raw(const T* cols, int c, int n, int h, int w, int stride, int pad, int out_h, int out_w);

}  // namespace

namespace {

template <class T>
void im2col_into(const Tensor<T>& x, int stride, int pad, int out_h, int out_w, T* out) {
  const std::size_t out_plane = static_cast<std::size_t>(out_h) * out_w;
  for (int ci = 0; ci < x.c; ++ci) {
    const T* src_c = x.channel(ci);
    for (int ky = 0; ky < kKernel; ++ky) {
      for (int kx = 0; kx < kKernel; ++kx) {
        T* row = out + ((static_cast<std::size_t>(ci) * kKernel + ky) * kKernel + kx) * x.n * out_plane;
        const auto [ox_lo, ox_hi] = valid_range(x.w, out_w, stride, pad, kx);
        for (int b = 0; b < x.n; ++b) {
          const T* src = src_c + static_cast<std::size_t>(b) * x.h * x.w;
          for (int oy = 0; oy < out_h; ++oy) {
            T* dst = row + (static_cast<std::size_t>(b) * out_h + oy) * out_w;
            const int iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= x.h || ox_lo >= ox_hi) {
              std::fill(dst, dst + out_w, T(0));
              continue;
            }
            std::fill(dst, dst + ox_lo, T(0));
            const T* line = src + static_cast<std::size_t>(iy) * x.w;
            if (stride == 1) {
              std::copy(line + ox_lo - pad + kx, line + ox_hi - pad + kx, dst + ox_lo);
            } else {
              for (int ox = ox_lo; ox < ox_hi; ++ox) dst[ox] = line[ox * stride - pad + kx];
            }
            std::fill(dst + ox_hi, dst + out_w, T(0));
          }
        }
      }
    }
  }
}

}  // namespace

template <class T>
RowMatrix<T> im2col(const Tensor<T>& x, int stride, int pad, int out_h, int out_w) {
  RowMatrix<T> cols(static_cast<Eigen::Index>(x.c) * kKernel * kKernel,
                    static_cast<Eigen::Index>(x.n) * out_h * out_w);
  im2col_into(x, stride, pad, out_h, out_w, cols.data());
  return cols;
}

template <class T>
Tensor<T> col2im(const RowMatrix<T>& cols, int c, int n, int h, int w, int stride, int pad, int out_h, int out_w) {
  return col2im_raw(cols.data(), c, n, h, w, stride, pad, out_h, out_w);
}

namespace {

template <class T>
Tensor<T> col2im_raw(const T* cols, int c, int n, int h, int w, int stride, int pad, int out_h, int out_w) {
  Tensor<T> x(c, n, h, w);
  const std::size_t out_plane = static_cast<std::size_t>(out_h) * out_w;
  for (int ci = 0; ci < c; ++ci) {
    T* dst_c = x.channel(ci);
    for (int ky = 0; ky < kKernel; ++ky) {
      for (int kx = 0; kx < kKernel; ++kx) {
        const T* row = cols + ((static_cast<std::size_t>(ci) * kKernel + ky) * kKernel + kx) * n * out_plane;
        const auto [ox_lo, ox_hi] = valid_range(w, out_w, stride, pad, kx);
        for (int b = 0; b < n; ++b) {
          T* dst = dst_c + static_cast<std::size_t>(b) * h * w;
          for (int oy = 0; oy < out_h; ++oy) {
            const int iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= h) continue;
            const T* src = row + (static_cast<std::size_t>(b) * out_h + oy) * out_w;
            T* line = dst + static_cast<std::size_t>(iy) * w;
            if (stride == 1) {
              T* dst_line = line - pad + kx;
              for (int ox = ox_lo; ox < ox_hi; ++ox) dst_line[ox] += src[ox];
            } else {
              for (int ox = ox_lo; ox < ox_hi; ++ox) line[ox * stride - pad + kx] += src[ox];
            }
          }
        }
      }
    }
  }
  return x;
}

}  // namespace

template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const T* weight, const T* bias, int cout, int stride, int pad) {
  const int out_h = conv_out_size(x.h, stride, pad);
  const int out_w = conv_out_size(x.w, stride, pad);
  const Eigen::Index k = static_cast<Eigen::Index>(x.c) * kKernel * kKernel;
  auto cols = scratch<T>(0, k, static_cast<Eigen::Index>(x.n) * out_h * out_w);
  im2col_into(x, stride, pad, out_h, out_w, cols.data());
  Eigen::Map<const RowMatrix<T>> wmat(weight, cout, k);
  Tensor<T> y(cout, x.n, out_h, out_w);
  y.mat().noalias() = wmat * cols;
  if (bias) {
    for (int co = 0; co < cout; ++co) {
      T* p = y.channel(co);
      std::for_each(p, p + y.plane(), [b = bias[co]](T& v) { v += b; });
    }
  }
  return y;
}

// Fixed summation order regardless of buffer alignment.
template <class T>
void add_channel_sums(const Tensor<T>& dy, T* out) {
  const std::size_t n = dy.plane();
  for (int c = 0; c < dy.c; ++c) {
    const T* p = dy.channel(c);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += p[i];
    out[c] += static_cast<T>(acc);
  }
}

template <class T>
void conv2d_backward(const Tensor<T>& x, const T* weight, int cout, int stride, int pad, const Tensor<T>& dy,
                     T* dweight, T* dbias, Tensor<T>* dx) {
  const Eigen::Index k = static_cast<Eigen::Index>(x.c) * kKernel * kKernel;
  auto cols = scratch<T>(0, k, static_cast<Eigen::Index>(x.n) * dy.h * dy.w);
  im2col_into(x, stride, pad, dy.h, dy.w, cols.data());
  Eigen::Map<RowMatrix<T>> dw(dweight, cout, k);
  dw.noalias() += dy.mat() * cols.transpose();
  if (dbias) add_channel_sums(dy, dbias);
  if (dx) {
    Eigen::Map<const RowMatrix<T>> wmat(weight, cout, k);
    auto dcols = scratch<T>(1, k, static_cast<Eigen::Index>(dy.plane()));
    dcols.noalias() = wmat.transpose() * dy.mat();
    *dx = col2im_raw(dcols.data(), x.c, x.n, x.h, x.w, stride, pad, dy.h, dy.w);
  }
}

template <class T>
Tensor<T> conv_transpose2d_forward(const Tensor<T>& x, const T* weight, const T* bias, int cout) {
  Eigen::Map<const RowMatrix<T>> wmat(weight, x.c, static_cast<Eigen::Index>(cout) * kKernel * kKernel);
  auto cols = scratch<T>(0, static_cast<Eigen::Index>(cout) * kKernel * kKernel, static_cast<Eigen::Index>(x.plane()));
  cols.noalias() = wmat.transpose() * x.mat();
  Tensor<T> y = col2im_raw(cols.data(), cout, x.n, 2 * x.h, 2 * x.w, 2, 1, x.h, x.w);
  if (bias) {
    for (int co = 0; co < cout; ++co) {
      T* p = y.channel(co);
      std::for_each(p, p + y.plane(), [b = bias[co]](T& v) { v += b; });
    }
  }
  return y;
}

template <class T>
void conv_transpose2d_backward(const Tensor<T>& x, const T* weight, int cout, const Tensor<T>& dy, T* dweight,
                               T* dbias, Tensor<T>* dx) {
  const Eigen::Index k = static_cast<Eigen::Index>(cout) * kKernel * kKernel;
  auto dcols = scratch<T>(0, k, static_cast<Eigen::Index>(x.plane()));
  im2col_into(dy, 2, 1, x.h, x.w, dcols.data());
  Eigen::Map<RowMatrix<T>> dw(dweight, x.c, k);
  dw.noalias() += x.mat() * dcols.transpose();
  if (dbias) add_channel_sums(dy, dbias);
  if (dx) {
    Eigen::Map<const RowMatrix<T>> wmat(weight, x.c, k);
    *dx = Tensor<T>(x.c, x.n, x.h, x.w);
    dx->mat().noalias() = wmat * dcols;
  }
}

template <class T>
Tensor<T> maxpool2_forward(const Tensor<T>& x, std::vector<std::int32_t>& argmax) {
  if (x.h % 2 != 0 || x.w % 2 != 0) throw ShapeError("max pooling needs even dimensions, got " + x.shape_string());
  Tensor<T> y(x.c, x.n, x.h / 2, x.w / 2);
  argmax.resize(y.size());
  std::size_t o = 0;
  for (int ci = 0; ci < x.c; ++ci) {
    for (int b = 0; b < x.n; ++b) {
      const std::size_t base = (static_cast<std::size_t>(ci) * x.n + b) * x.h * x.w;
      for (int oy = 0; oy < y.h; ++oy) {
        for (int ox = 0; ox < y.w; ++ox, ++o) {
          std::size_t best = base + static_cast<std::size_t>(2 * oy) * x.w + 2 * ox;
          for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
              const std::size_t idx = base + static_cast<std::size_t>(2 * oy + dy) * x.w + 2 * ox + dx;
              if (x.data[idx] > x.data[best]) best = idx;
            }
          }
          y.data[o] = x.data[best];
          argmax[o] = static_cast<std::int32_t>(best);
        }
      }
    }
  }
  return y;
}

template <class T>
Tensor<T> maxpool2_backward(const Tensor<T>& dy, const std::vector<std::int32_t>& argmax, int c, int n, int h,
                            int w) {
  Tensor<T> dx(c, n, h, w);
  for (std::size_t o = 0; o < dy.size(); ++o) dx.data[static_cast<std::size_t>(argmax[o])] += dy.data[o];
  return dx;
}

template <class T>
void leaky_relu_inplace(Tensor<T>& x, T slope) {
  for (T& v : x.data) v = v > T(0) ? v : v * slope;
}

template <class T>
void leaky_relu_backward_inplace(const Tensor<T>& out, T slope, Tensor<T>& dy) {
  for (std::size_t i = 0; i < dy.size(); ++i) {
    if (!(out.data[i] > T(0))) dy.data[i] *= slope;
  }
}

template <class T>
void sigmoid_inplace(Tensor<T>& x) {
  // Keep outputs strictly inside (0, 1) even when the logistic saturates.
  constexpr T lo = std::numeric_limits<T>::min();
  const T hi = std::nextafter(T(1), T(0));
  for (T& v : x.data) {
    const T s = v >= T(0) ? T(1) / (T(1) + std::exp(-v)) : std::exp(v) / (T(1) + std::exp(v));
    v = std::clamp(s, lo, hi);
  }
}

template <class T>
void sigmoid_backward_inplace(const Tensor<T>& out, Tensor<T>& dy) {
  for (std::size_t i = 0; i < dy.size(); ++i) dy.data[i] *= out.data[i] * (T(1) - out.data[i]);
}

#define F2V_INSTANTIATE_LAYERS(T)                                                                              \
  template RowMatrix<T> im2col<T>(const Tensor<T>&, int, int, int, int);                                       \
  template Tensor<T> col2im<T>(const RowMatrix<T>&, int, int, int, int, int, int, int, int);                   \
  template Tensor<T> conv2d_forward<T>(const Tensor<T>&, const T*, const T*, int, int, int);                   \
  template void conv2d_backward<T>(const Tensor<T>&, const T*, int, int, int, const Tensor<T>&, T*, T*,        \
                                   Tensor<T>*);                                                                \
  template Tensor<T> conv_transpose2d_forward<T>(const Tensor<T>&, const T*, const T*, int);                   \
  template void conv_transpose2d_backward<T>(const Tensor<T>&, const T*, int, const Tensor<T>&, T*, T*,        \
                                             Tensor<T>*);                                                      \
  template Tensor<T> maxpool2_forward<T>(const Tensor<T>&, std::vector<std::int32_t>&);                        \
  template Tensor<T> maxpool2_backward<T>(const Tensor<T>&, const std::vector<std::int32_t>&, int, int, int,   \
                                          int);                                                                \
  template void leaky_relu_inplace<T>(Tensor<T>&, T);                                                          \
  template void leaky_relu_backward_inplace<T>(const Tensor<T>&, T, Tensor<T>&);                               \
  template void sigmoid_inplace<T>(Tensor<T>&);                                                                \
  template void sigmoid_backward_inplace<T>(const Tensor<T>&, Tensor<T>&);

F2V_INSTANTIATE_LAYERS(float)
F2V_INSTANTIATE_LAYERS(double)

}  // namespace f2v::nn
