#pragma once

#include <cstdint>
#include <vector>

#include "f2v/nn/tensor.hpp"

namespace f2v::nn {

// 3x3 kernels throughout. Convolution weights are (cout, cin, 3, 3);
// transposed-convolution weights are (cin, cout, 3, 3).
inline constexpr int kKernel = 3;

/// Column matrix (c*9) x (n*out_h*out_w) for a 3x3 convolution.
template <class T>
RowMatrix<T> im2col(const Tensor<T>& x, int stride, int pad, int out_h, int out_w);

/// Adjoint of im2col; accumulates columns back into a c x n x h x w tensor.
template <class T>
Tensor<T> col2im(const RowMatrix<T>& cols, int c, int n, int h, int w, int stride, int pad, int out_h, int out_w);

inline int conv_out_size(int in, int stride, int pad) { return (in + 2 * pad - kKernel) / stride + 1; }

template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const T* weight, const T* bias, int cout, int stride, int pad);

/// Accumulates into dweight/dbias; writes dx when non-null.
template <class T>
void conv2d_backward(const Tensor<T>& x, const T* weight, int cout, int stride, int pad, const Tensor<T>& dy,
                     T* dweight, T* dbias, Tensor<T>* dx);

/// Stride-2 transposed convolution (padding 1, output padding 1): h x w -> 2h x 2w.
template <class T>
Tensor<T> conv_transpose2d_forward(const Tensor<T>& x, const T* weight, const T* bias, int cout);

template <class T>
void conv_transpose2d_backward(const Tensor<T>& x, const T* weight, int cout, const Tensor<T>& dy, T* dweight,
                               T* dbias, Tensor<T>* dx);

/// 2x2 max pooling; argmax receives the flat source index of each output.
template <class T>
Tensor<T> maxpool2_forward(const Tensor<T>& x, std::vector<std::int32_t>& argmax);

template <class T>
Tensor<T> maxpool2_backward(const Tensor<T>& dy, const std::vector<std::int32_t>& argmax, int c, int n, int h, int w);

template <class T>
void leaky_relu_inplace(Tensor<T>& x, T slope);

/// dy *= f'(pre), evaluated from the activation output (slope > 0).
template <class T>
void leaky_relu_backward_inplace(const Tensor<T>& out, T slope, Tensor<T>& dy);

template <class T>
void sigmoid_inplace(Tensor<T>& x);

template <class T>
void sigmoid_backward_inplace(const Tensor<T>& out, Tensor<T>& dy);

}  // namespace f2v::nn
