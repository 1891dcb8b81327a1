#include "f2v/losses/losses.hpp"

#include <cmath>
#include <string>

#include "f2v/core/errors.hpp"

namespace f2v {
namespace {

template <class T>
void check_same(std::span<const T> a, std::span<const T> b, const char* what) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(what) + ": size mismatch " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  if (a.empty()) throw ShapeError(std::string(what) + ": empty input");
}

std::size_t frame_block(std::size_t total, int frames, const char* what) {
  if (frames < 1) throw ShapeError(std::string(what) + ": frames must be >= 1");
  if (total % static_cast<std::size_t>(frames) != 0) {
    throw ShapeError(std::string(what) + ": " + std::to_string(total) + " values do not split into " +
                     std::to_string(frames) + " frames");
  }
  return total / static_cast<std::size_t>(frames);
}

template <class T>
void check_latent(std::span<const T> mu, std::span<const T> logvar, int batch) {
  if (mu.size() != logvar.size()) throw ShapeError("mu and logvar sizes differ");
  if (batch < 1) throw ShapeError("batch must be >= 1");
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!std::isfinite(mu[i]) || !std::isfinite(logvar[i])) throw NumericError("non-finite latent statistics");
  }
}

}  // namespace

template <class T>
double l_rec(std::span<const T> y, std::span<const T> y_hat) {
  check_same(y, y_hat, "l_rec");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = static_cast<double>(y[i]) - static_cast<double>(y_hat[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(y.size());
}

template <class T>
std::vector<T> temporal_gradient(std::span<const T> video, int frames) {
  const std::size_t block = frame_block(video.size(), frames, "temporal_gradient");
  std::vector<T> out(video.size() - block);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = video[i + block] - video[i];
  return out;
}

template <class T>
double l_tg(std::span<const T> y, std::span<const T> y_hat, int frames) {
  check_same(y, y_hat, "l_tg");
  const std::size_t block = frame_block(y.size(), frames, "l_tg");
  const std::size_t n = y.size() - block;
  if (n == 0) return 0.0;  // a single frame has no temporal gradient
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double gy = static_cast<double>(y[i + block]) - static_cast<double>(y[i]);
    const double gh = static_cast<double>(y_hat[i + block]) - static_cast<double>(y_hat[i]);
    sum += std::abs(gy - gh);
  }
  return sum / static_cast<double>(n);
}

template <class T>
double kl_divergence(std::span<const T> mu, std::span<const T> logvar, int batch) {
  check_latent(mu, logvar, batch);
  double sum = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double m = mu[i];
    const double lv = logvar[i];
    sum += -0.5 * (1.0 + lv - m * m - std::exp(lv));
  }
  return sum / batch;
}

template <class T>
LossReport total_loss(std::span<const T> y, std::span<const T> y_hat, int frames, std::span<const T> mu,
                      std::span<const T> logvar, int batch, double beta) {
  if (!(beta >= 0.0)) throw ParameterError("beta must be >= 0");
  LossReport r;
  r.l_rec = l_rec(y, y_hat);
  r.l_tg = l_tg(y, y_hat, frames);
  r.kl = kl_divergence(mu, logvar, batch);
  r.beta = beta;
  r.total = r.l_rec + r.l_tg + beta * r.kl;
  return r;
}

template <class T>
LossReport total_loss_with_grad(std::span<const T> y, std::span<const T> y_hat, int frames, std::span<const T> mu,
                                std::span<const T> logvar, int batch, double beta, LossGradients<T>& g) {
  LossReport r = total_loss(y, y_hat, frames, mu, logvar, batch, beta);
  const std::size_t n = y.size();
  const std::size_t block = n / static_cast<std::size_t>(frames);
  g.d_y_hat.assign(n, T(0));
  const double rec_scale = 2.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.d_y_hat[i] = static_cast<T>(rec_scale * (static_cast<double>(y_hat[i]) - static_cast<double>(y[i])));
  }
  const double tg_scale = n > block ? 1.0 / static_cast<double>(n - block) : 0.0;
  for (std::size_t i = 0; i + block < n; ++i) {
    const double gy = static_cast<double>(y[i + block]) - static_cast<double>(y[i]);
    const double gh = static_cast<double>(y_hat[i + block]) - static_cast<double>(y_hat[i]);
    const double d = gh - gy;
    const double s = d > 0.0 ? tg_scale : (d < 0.0 ? -tg_scale : 0.0);
    g.d_y_hat[i + block] += static_cast<T>(s);
    g.d_y_hat[i] -= static_cast<T>(s);
  }
  g.d_mu.resize(mu.size());
  g.d_logvar.resize(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    g.d_mu[i] = static_cast<T>(beta * static_cast<double>(mu[i]) / batch);
    g.d_logvar[i] = static_cast<T>(beta * 0.5 * (std::exp(static_cast<double>(logvar[i])) - 1.0) / batch);
  }
  return r;
}

std::vector<float> flatten(const VideoTensor& video) {
  std::vector<float> out;
  if (video.frames.empty()) return out;
  const std::size_t block = video.frames.front().data.size();
  out.reserve(block * video.frames.size());
  for (const auto& f : video.frames) {
    if (f.data.size() != block) throw ShapeError("video frames have different sizes");
    out.insert(out.end(), f.data.begin(), f.data.end());
  }
  return out;
}

double l_rec(const VideoTensor& y, const VideoTensor& y_hat) {
  if (y.num_frames() != y_hat.num_frames()) throw ShapeError("l_rec: frame count mismatch");
  const auto a = flatten(y);
  const auto b = flatten(y_hat);
  return l_rec<float>(a, b);
}

VideoTensor temporal_gradient(const VideoTensor& video) {
  if (video.num_frames() < 2) throw ShapeError("temporal_gradient needs at least 2 frames");
  const auto flat = flatten(video);
  const auto tg = temporal_gradient<float>(flat, video.num_frames());
  VideoTensor out;
  const Image& proto = video.frames.front();
  const std::size_t block = proto.data.size();
  for (int k = 0; k + 1 < video.num_frames(); ++k) {
    Image img(proto.channels, proto.height, proto.width);
    std::copy(tg.begin() + static_cast<std::ptrdiff_t>(k * block),
              tg.begin() + static_cast<std::ptrdiff_t>((k + 1) * block), img.data.begin());
    out.frames.push_back(std::move(img));
  }
  return out;
}

double l_tg(const VideoTensor& y, const VideoTensor& y_hat) {
  if (y.num_frames() != y_hat.num_frames()) throw ShapeError("l_tg: frame count mismatch");
  const auto a = flatten(y);
  const auto b = flatten(y_hat);
  return l_tg<float>(a, b, y.num_frames());
}

#define F2V_INSTANTIATE_LOSSES(T)                                                                              \
  template double l_rec<T>(std::span<const T>, std::span<const T>);                                            \
  template std::vector<T> temporal_gradient<T>(std::span<const T>, int);                                       \
  template double l_tg<T>(std::span<const T>, std::span<const T>, int);                                        \
  template double kl_divergence<T>(std::span<const T>, std::span<const T>, int);                               \
  template LossReport total_loss<T>(std::span<const T>, std::span<const T>, int, std::span<const T>,           \
                                    std::span<const T>, int, double);                                          \
  template LossReport total_loss_with_grad<T>(std::span<const T>, std::span<const T>, int, std::span<const T>, \
                                              std::span<const T>, int, double, LossGradients<T>&);

F2V_INSTANTIATE_LOSSES(float)
F2V_INSTANTIATE_LOSSES(double)

}  // namespace f2v
