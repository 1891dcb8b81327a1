#include "f2v/model/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "f2v/core/errors.hpp"
#include "f2v/core/rng.hpp"
#include "f2v/nn/layers.hpp"

namespace f2v {

using nn::Tensor;

template <class T>
FrameToVideoNet<T>::FrameToVideoNet(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  const int stages = config_.num_stages();
  const auto& ch = config_.stage_channels;

  int cin = config_.sm_in_channels();
  for (int s = 0; s < stages; ++s) {
    const std::string p = "sm.stage" + std::to_string(s);
    sm_convs_.push_back(add_conv(p + ".conv0", cin, ch[s], false));
    sm_convs_.push_back(add_conv(p + ".conv1", ch[s], ch[s], false));
    cin = ch[s];
  }
  cin = config_.of_in_channels();
  for (int s = 0; s < stages; ++s) {
    const std::string p = "of.stage" + std::to_string(s);
    of_convs_.push_back(add_conv(p + ".conv0", cin, ch[s], false));
    of_convs_.push_back(add_conv(p + ".conv1", ch[s], ch[s], false));
    cin = ch[s];
  }
  mu_head_ = add_conv("of.mu", ch.back(), config_.latent_channels, false);
  logvar_head_ = add_conv("of.logvar", ch.back(), config_.latent_channels, false);

  cin = config_.feature_channels() + config_.latent_channels;
  for (int j = 0; j < stages; ++j) {
    const int cout = ch[stages - 1 - j];
    up_convs_.push_back(add_conv("dec.up" + std::to_string(j), cin, cout, true));
    cin = 2 * cout;  // upsampled + skip
  }
  out_conv_ = add_conv("dec.out", cin, config_.output_channels(), false);
}

template <class T>
typename FrameToVideoNet<T>::Conv FrameToVideoNet<T>::add_conv(const std::string& name, int cin, int cout,
                                                                bool transposed) {
  Conv c;
  c.cin = cin;
  c.cout = cout;
  c.weight = transposed ? params_.add(name + ".weight", {cin, cout, 3, 3})
                        : params_.add(name + ".weight", {cout, cin, 3, 3});
  c.bias = params_.add(name + ".bias", {cout});
  transposed_.resize(params_.count(), false);
  transposed_[static_cast<std::size_t>(c.weight)] = transposed;
  return c;
}

template <class T>
void FrameToVideoNet<T>::initialize(std::uint64_t seed) {
  Rng rng(seed);
  const double slope = config_.leaky_slope;
  const auto init = [&](const Conv& c, bool linear) {
    auto& w = params_[c.weight];
    // Each transposed-conv output sees on average 9/4 taps per input channel.
    const double fan_in = transposed_[static_cast<std::size_t>(c.weight)] ? c.cin * 9.0 / 4.0 : c.cin * 9.0;
    const double bound = linear ? std::sqrt(3.0 / fan_in) : std::sqrt(6.0 / ((1.0 + slope * slope) * fan_in));
    for (auto& v : w.value) v = static_cast<T>((2.0 * rng.uniform() - 1.0) * bound);
    auto& b = params_[c.bias].value;
    std::fill(b.begin(), b.end(), T(0));
  };
  for (const auto& c : sm_convs_) init(c, false);
  for (const auto& c : of_convs_) init(c, false);
  init(mu_head_, true);
  init(logvar_head_, true);
  for (const auto& c : up_convs_) init(c, false);
  init(out_conv_, true);
}

template <class T>
void FrameToVideoNet<T>::check_input(const Tensor<T>& x, int channels, const char* what) const {
  if (x.c != channels || x.h != config_.image_size || x.w != config_.image_size || x.n < 1) {
    throw ShapeError(std::string(what) + " input: expected " + std::to_string(channels) + "xNx" +
                     std::to_string(config_.image_size) + "x" + std::to_string(config_.image_size) + ", got " +
                     x.shape_string());
  }
}

template <class T>
Tensor<T> FrameToVideoNet<T>::conv(const Conv& layer, const Tensor<T>& x) const {
  return nn::conv2d_forward(x, params_[layer.weight].value.data(), params_[layer.bias].value.data(), layer.cout, 1, 1);
}

template <class T>
Tensor<T> FrameToVideoNet<T>::conv_backward(const Conv& layer, const Tensor<T>& x, const Tensor<T>& dy,
                                            bool need_dx) {
  Tensor<T> dx;
  nn::conv2d_backward(x, params_[layer.weight].value.data(), layer.cout, 1, 1, dy, params_[layer.weight].grad.data(),
                      params_[layer.bias].grad.data(), need_dx ? &dx : nullptr);
  return dx;
}

template <class T>
TrunkState<T> FrameToVideoNet<T>::run_trunk(const std::vector<Conv>& convs, const Tensor<T>& input) const {
  const T slope = static_cast<T>(config_.leaky_slope);
  TrunkState<T> st;
  Tensor<T> x = input;
  for (int s = 0; s < config_.num_stages(); ++s) {
    Tensor<T> a = conv(convs[2 * s], x);
    nn::leaky_relu_inplace(a, slope);
    Tensor<T> b = conv(convs[2 * s + 1], a);
    nn::leaky_relu_inplace(b, slope);
    std::vector<std::int32_t> argmax;
    Tensor<T> pooled = nn::maxpool2_forward(b, argmax);
    st.stage_in.push_back(std::move(x));
    st.mid.push_back(std::move(a));
    st.skip.push_back(std::move(b));
    st.argmax.push_back(std::move(argmax));
    x = std::move(pooled);
  }
  st.out = std::move(x);
  return st;
}

template <class T>
TrunkState<T> FrameToVideoNet<T>::sm_encode(const Tensor<T>& sm_input) const {
  check_input(sm_input, config_.sm_in_channels(), "semantic-map encoder");
  return run_trunk(sm_convs_, sm_input);
}

template <class T>
void FrameToVideoNet<T>::of_encode(const Tensor<T>& of_input, TrunkState<T>& trunk, LatentState<T>& latent) const {
  check_input(of_input, config_.of_in_channels(), "optical-flow encoder");
  trunk = run_trunk(of_convs_, of_input);
  latent.mu = conv(mu_head_, trunk.out);
  latent.logvar_raw = conv(logvar_head_, trunk.out);
  latent.logvar = latent.logvar_raw;
  for (T& v : latent.logvar.data) v = std::clamp(v, static_cast<T>(kLogvarMin), static_cast<T>(kLogvarMax));
}

template <class T>
Tensor<T> FrameToVideoNet<T>::reparameterize(const LatentState<T>& latent, const Tensor<T>& noise) {
  if (!noise.same_shape(latent.mu)) {
    throw ShapeError("noise " + noise.shape_string() + " does not match latent " + latent.mu.shape_string());
  }
  Tensor<T> z = latent.mu;
  for (std::size_t i = 0; i < z.size(); ++i) z.data[i] += std::exp(T(0.5) * latent.logvar.data[i]) * noise.data[i];
  return z;
}

template <class T>
void FrameToVideoNet<T>::decode(const Tensor<T>& features, const Tensor<T>& z, const std::vector<Tensor<T>>& skips,
                                ForwardState<T>& state) const {
  const int stages = config_.num_stages();
  if (features.c != config_.feature_channels() || z.c != config_.latent_channels || !(features.n == z.n) ||
      features.h != config_.latent_spatial || z.h != config_.latent_spatial ||
      static_cast<int>(skips.size()) != stages) {
    throw ShapeError("decoder inputs inconsistent with config: features " + features.shape_string() + ", z " +
                     z.shape_string() + ", " + std::to_string(skips.size()) + " skips");
  }
  const T slope = static_cast<T>(config_.leaky_slope);
  state.dec_in.clear();
  state.up.clear();
  state.dec_in.push_back(nn::concat_channels(features, z));
  for (int j = 0; j < stages; ++j) {
    const Conv& layer = up_convs_[static_cast<std::size_t>(j)];
    Tensor<T> u = nn::conv_transpose2d_forward(state.dec_in.back(), params_[layer.weight].value.data(),
                                               params_[layer.bias].value.data(), layer.cout);
    nn::leaky_relu_inplace(u, slope);
    const Tensor<T>& skip = skips[static_cast<std::size_t>(stages - 1 - j)];
    state.dec_in.push_back(nn::concat_channels(u, skip));
    state.up.push_back(std::move(u));
  }
  state.output = conv(out_conv_, state.dec_in.back());
  nn::sigmoid_inplace(state.output);
}

template <class T>
ForwardState<T> FrameToVideoNet<T>::forward(const Tensor<T>& sm_input, const Tensor<T>& of_input,
                                            const Tensor<T>* noise) const {
  if (sm_input.n != of_input.n) throw ShapeError("semantic and flow inputs have different batch sizes");
  ForwardState<T> st;
  st.sm = sm_encode(sm_input);
  of_encode(of_input, st.of, st.latent);
  if (noise) {
    st.noise = *noise;
    st.z = reparameterize(st.latent, *noise);
  } else {
    st.z = st.latent.mu;
  }
  decode(st.sm.out, st.z, st.sm.skip, st);
  return st;
}

template <class T>
Tensor<T> FrameToVideoNet<T>::trunk_backward(const std::vector<Conv>& convs, const TrunkState<T>& st, Tensor<T> d_out,
                                             const std::vector<Tensor<T>>* d_skips, bool need_input_grad) {
  const T slope = static_cast<T>(config_.leaky_slope);
  Tensor<T> d = std::move(d_out);
  for (int s = config_.num_stages() - 1; s >= 0; --s) {
    const auto& skip = st.skip[static_cast<std::size_t>(s)];
    Tensor<T> d_skip = nn::maxpool2_backward(d, st.argmax[static_cast<std::size_t>(s)], skip.c, skip.n, skip.h, skip.w);
    if (d_skips) d_skip.mat() += (*d_skips)[static_cast<std::size_t>(s)].mat();
    nn::leaky_relu_backward_inplace(skip, slope, d_skip);
    Tensor<T> d_mid = conv_backward(convs[2 * s + 1], st.mid[static_cast<std::size_t>(s)], d_skip, true);
    nn::leaky_relu_backward_inplace(st.mid[static_cast<std::size_t>(s)], slope, d_mid);
    d = conv_backward(convs[2 * s], st.stage_in[static_cast<std::size_t>(s)], d_mid, s > 0 || need_input_grad);
  }
  return d;
}

template <class T>
void FrameToVideoNet<T>::backward(const ForwardState<T>& st, const Tensor<T>& d_output, const Tensor<T>& d_mu,
                                  const Tensor<T>& d_logvar) {
  if (!d_output.same_shape(st.output)) {
    throw ShapeError("output gradient " + d_output.shape_string() + " does not match " + st.output.shape_string());
  }
  const int stages = config_.num_stages();
  const T slope = static_cast<T>(config_.leaky_slope);

  // Decoder.
  Tensor<T> d_pre = d_output;
  nn::sigmoid_backward_inplace(st.output, d_pre);
  Tensor<T> d_in = conv_backward(out_conv_, st.dec_in.back(), d_pre, true);
  std::vector<Tensor<T>> d_skips(static_cast<std::size_t>(stages));
  for (int j = stages - 1; j >= 0; --j) {
    const Conv& layer = up_convs_[static_cast<std::size_t>(j)];
    const Tensor<T>& u = st.up[static_cast<std::size_t>(j)];
    Tensor<T> d_u;
    nn::split_channels(d_in, u.c, d_u, d_skips[static_cast<std::size_t>(stages - 1 - j)]);
    nn::leaky_relu_backward_inplace(u, slope, d_u);
    Tensor<T> d_prev;
    nn::conv_transpose2d_backward(st.dec_in[static_cast<std::size_t>(j)], params_[layer.weight].value.data(),
                                  layer.cout, d_u, params_[layer.weight].grad.data(), params_[layer.bias].grad.data(),
                                  &d_prev);
    d_in = std::move(d_prev);
  }
  Tensor<T> d_features;
  Tensor<T> d_z;
  nn::split_channels(d_in, config_.feature_channels(), d_features, d_z);

  // Semantic-map encoder.
  trunk_backward(sm_convs_, st.sm, std::move(d_features), &d_skips, false);

  // Reparameterization and latent heads.
  Tensor<T> g_mu = d_z;
  Tensor<T> g_logvar(d_z.c, d_z.n, d_z.h, d_z.w);
  if (!st.noise.data.empty()) {
    for (std::size_t i = 0; i < g_logvar.size(); ++i) {
      g_logvar.data[i] = d_z.data[i] * T(0.5) * std::exp(T(0.5) * st.latent.logvar.data[i]) * st.noise.data[i];
    }
  }
  if (!d_mu.data.empty()) g_mu.mat() += d_mu.mat();
  if (!d_logvar.data.empty()) g_logvar.mat() += d_logvar.mat();
  for (std::size_t i = 0; i < g_logvar.size(); ++i) {
    const T raw = st.latent.logvar_raw.data[i];
    if (raw < static_cast<T>(kLogvarMin) || raw > static_cast<T>(kLogvarMax)) g_logvar.data[i] = T(0);
  }
  Tensor<T> d_trunk = conv_backward(mu_head_, st.of.out, g_mu, true);
  d_trunk.mat() += conv_backward(logvar_head_, st.of.out, g_logvar, true).mat();

  // Optical-flow encoder.
  trunk_backward(of_convs_, st.of, std::move(d_trunk), nullptr, false);
}

template class FrameToVideoNet<float>;
template class FrameToVideoNet<double>;

}  // namespace f2v
