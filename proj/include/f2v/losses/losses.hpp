#pragma once

#include <span>
#include <vector>

#include "f2v/core/types.hpp"

namespace f2v {

struct LossReport {
  double l_rec = 0.0;
  double l_tg = 0.0;
  double kl = 0.0;
  double beta = 1.0;
  double total = 0.0;
};

// Videos are passed flat and frame-major: `frames` equal contiguous blocks.
// A batch may be folded into each block; the mean reductions do not care.

/// Mean squared error over all elements.
template <class T>
double l_rec(std::span<const T> y, std::span<const T> y_hat);

/// frames-1 blocks of F[t+1] - F[t].
template <class T>
std::vector<T> temporal_gradient(std::span<const T> video, int frames);

/// Mean absolute difference between the temporal gradients.
template <class T>
double l_tg(std::span<const T> y, std::span<const T> y_hat, int frames);

/// Closed-form KL(N(mu, exp(logvar)) || N(0, 1)), summed over latent
/// elements and averaged over `batch`.
template <class T>
double kl_divergence(std::span<const T> mu, std::span<const T> logvar, int batch);

template <class T>
LossReport total_loss(std::span<const T> y, std::span<const T> y_hat, int frames, std::span<const T> mu,
                      std::span<const T> logvar, int batch, double beta);

template <class T>
struct LossGradients {
  std::vector<T> d_y_hat;
  std::vector<T> d_mu;
  std::vector<T> d_logvar;
};

/// total_loss plus its gradient with respect to y_hat, mu and logvar.
template <class T>
LossReport total_loss_with_grad(std::span<const T> y, std::span<const T> y_hat, int frames, std::span<const T> mu,
                                std::span<const T> logvar, int batch, double beta, LossGradients<T>& grads);

// Convenience overloads on single videos.
double l_rec(const VideoTensor& y, const VideoTensor& y_hat);
VideoTensor temporal_gradient(const VideoTensor& video);
double l_tg(const VideoTensor& y, const VideoTensor& y_hat);

/// Flattens frames in order; throws ShapeError on ragged input.
std::vector<float> flatten(const VideoTensor& video);

}  // namespace f2v
