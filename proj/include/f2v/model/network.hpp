#pragma once

#include <cstdint>
#include <vector>

#include "f2v/model/config.hpp"
#include "f2v/model/parameters.hpp"
#include "f2v/nn/tensor.hpp"

namespace f2v {

// Activations cached by one convolutional trunk for the backward pass.
template <class T>
struct TrunkState {
  std::vector<nn::Tensor<T>> stage_in;  // input of each stage
  std::vector<nn::Tensor<T>> mid;       // after the first conv + activation
  std::vector<nn::Tensor<T>> skip;      // after the second conv + activation (pre-pool)
  std::vector<std::vector<std::int32_t>> argmax;
  nn::Tensor<T> out;                    // pooled output of the last stage
};

template <class T>
struct LatentState {
  nn::Tensor<T> mu;
  nn::Tensor<T> logvar_raw;  // head output before clamping
  nn::Tensor<T> logvar;      // clamped to [kLogvarMin, kLogvarMax]
};

template <class T>
struct ForwardState {
  TrunkState<T> sm;
  TrunkState<T> of;
  LatentState<T> latent;
  nn::Tensor<T> noise;  // empty in mean mode
  nn::Tensor<T> z;
  std::vector<nn::Tensor<T>> dec_in;  // input of each decoder layer, last is the output conv's
  std::vector<nn::Tensor<T>> up;      // transposed-conv activations
  nn::Tensor<T> output;               // sigmoid, horizon*3 channels
};

inline constexpr double kLogvarMin = -10.0;
inline constexpr double kLogvarMax = 10.0;

// Semantic-map encoder + variational flow encoder + shared decoder with
// skips from the semantic-map encoder only.
//
// Tensor layouts: semantic/direction input 5 x N x S x S (channels 0-2 color,
// 3-4 direction); flow input of_in_channels x N x S x S; output
// (3 * horizon) x N x S x S where frame k owns channels 3k .. 3k+2.
template <class T>
class FrameToVideoNet {
 public:
  explicit FrameToVideoNet(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  ParameterSet<T>& parameters() { return params_; }
  const ParameterSet<T>& parameters() const { return params_; }

  /// Fan-in scaled uniform weights, zero biases.
  void initialize(std::uint64_t seed);

  TrunkState<T> sm_encode(const nn::Tensor<T>& sm_input) const;
  void of_encode(const nn::Tensor<T>& of_input, TrunkState<T>& trunk, LatentState<T>& latent) const;
  /// z = mu + exp(0.5 logvar) * noise.
  static nn::Tensor<T> reparameterize(const LatentState<T>& latent, const nn::Tensor<T>& noise);
  void decode(const nn::Tensor<T>& features, const nn::Tensor<T>& z, const std::vector<nn::Tensor<T>>& skips,
              ForwardState<T>& state) const;

  /// Full forward. `noise == nullptr` selects the mean (z = mu) path.
  ForwardState<T> forward(const nn::Tensor<T>& sm_input, const nn::Tensor<T>& of_input,
                          const nn::Tensor<T>* noise) const;

  /// Accumulates parameter gradients given dLoss/d(output) and the direct
  /// dLoss/d(mu), dLoss/d(logvar) contributions (KL term). Either latent
  /// gradient may be empty.
  void backward(const ForwardState<T>& state, const nn::Tensor<T>& d_output, const nn::Tensor<T>& d_mu,
                const nn::Tensor<T>& d_logvar);

 private:
  struct Conv {
    int weight = -1;
    int bias = -1;
    int cin = 0;
    int cout = 0;
  };

  Conv add_conv(const std::string& name, int cin, int cout, bool transposed);
  void check_input(const nn::Tensor<T>& x, int channels, const char* what) const;
  TrunkState<T> run_trunk(const std::vector<Conv>& convs, const nn::Tensor<T>& input) const;
  nn::Tensor<T> trunk_backward(const std::vector<Conv>& convs, const TrunkState<T>& state, nn::Tensor<T> d_out,
                               const std::vector<nn::Tensor<T>>* d_skips, bool need_input_grad);
  nn::Tensor<T> conv(const Conv& layer, const nn::Tensor<T>& x) const;
  nn::Tensor<T> conv_backward(const Conv& layer, const nn::Tensor<T>& x, const nn::Tensor<T>& dy, bool need_dx);

  ModelConfig config_;
  ParameterSet<T> params_;
  std::vector<Conv> sm_convs_;  // two per stage
  std::vector<Conv> of_convs_;
  Conv mu_head_;
  Conv logvar_head_;
  std::vector<Conv> up_convs_;  // transposed
  Conv out_conv_;
  std::vector<bool> transposed_;  // indexed by weight parameter id
};

extern template class FrameToVideoNet<float>;
extern template class FrameToVideoNet<double>;

}  // namespace f2v
