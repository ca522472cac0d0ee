#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xaug/layers.hpp"
#include "xaug/tensor.hpp"

namespace xaug {

struct NetworkConfig {
  int depth = 5;          // downsampling stages
  int base_filters = 8;   // channels at stage 0; doubles per stage
  int patch_size = 128;   // input is 1 x P x P
  std::uint64_t seed = 0;

  /// Small network used for tests and the phantom experiments.
  static NetworkConfig desk() { return NetworkConfig{3, 4, 32, 0}; }

  void validate() const;
  /// Channel count of stage i for i = 0..depth (the last entry is the central stage).
  std::vector<int> stage_channels() const;
};

template <class T>
struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<T> value;
  std::vector<T> grad;
};

/// Convolution with its parameters and the cached input needed for backward.
template <class T>
class ConvLayer {
public:
  ConvLayer() = default;
  ConvLayer(std::string name, ConvShape shape);

  Tensor4<T> forward(const Tensor4<T>& x);
  /// Accumulates parameter gradients; returns the input gradient.
  Tensor4<T> backward(const Tensor4<T>& grad_out);

  const ConvShape& shape() const noexcept { return shape_; }
  Param<T>& weight() noexcept { return weight_; }
  Param<T>& bias() noexcept { return bias_; }
  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

private:
  ConvShape shape_;
  Param<T> weight_, bias_;
  Tensor4<T> input_;
};

/// y = ReLU(conv2(ReLU(conv1(x))) + proj(x)); proj is identity when the
/// channel count is unchanged and a 1x1 convolution otherwise.
template <class T>
class ResidualBlock {
public:
  ResidualBlock() = default;
  ResidualBlock(const std::string& name, int in_ch, int out_ch);

  Tensor4<T> forward(const Tensor4<T>& x);
  Tensor4<T> backward(const Tensor4<T>& grad_out);

  int in_channels() const noexcept { return conv1_.shape().in_ch; }
  int out_channels() const noexcept { return conv1_.shape().out_ch; }
  bool has_projection() const noexcept { return proj_.has_value(); }
  ConvLayer<T>& conv1() noexcept { return conv1_; }
  ConvLayer<T>& conv2() noexcept { return conv2_; }
  void collect(std::vector<Param<T>*>& out);

private:
  ConvLayer<T> conv1_, conv2_;
  std::optional<ConvLayer<T>> proj_;
  Tensor4<T> pre1_, pre_out_;
};

/// Residual U-Net: `depth` downsampling stages, a central stage, `depth`
/// upsampling stages fed by skip concatenation, then 1x1 conv + sigmoid.
template <class T>
class UNet {
public:
  /// Weights are He-initialised from cfg.seed.
  explicit UNet(const NetworkConfig& cfg);

  /// N x 1 x P x P in, N x 1 x P x P probabilities out. Caches activations.
  Tensor4<T> forward(const Tensor4<T>& x);
  /// Takes d loss / d probability; accumulates parameter gradients and
  /// returns the input gradient. Must follow forward().
  Tensor4<T> backward(const Tensor4<T>& grad_prob);

  /// Parameters in a fixed order (encoder, center, decoder, head).
  std::vector<Param<T>*> parameters();
  std::vector<const Param<T>*> parameters() const;
  std::size_t parameter_count() const;
  void zero_grad();

  const NetworkConfig& config() const noexcept { return cfg_; }
  const std::vector<ResidualBlock<T>>& encoder() const noexcept { return enc_; }
  const ResidualBlock<T>& center() const noexcept { return center_; }

private:
  NetworkConfig cfg_;
  std::vector<ResidualBlock<T>> enc_;
  ResidualBlock<T> center_;
  std::vector<ResidualBlock<T>> dec_;  // dec_[i] restores the resolution of enc_[i]
  ConvLayer<T> head_;

  std::vector<std::vector<std::uint32_t>> pool_argmax_;
  std::vector<std::array<int, 4>> pool_input_dims_;
  std::vector<int> up_channels_;
  Tensor4<T> prob_;
};

/// He-style fan-in normal initialisation from `seed`; biases zero.
template <class T>
void init_he(std::vector<Param<T>*> params, std::uint64_t seed);

extern template class ConvLayer<float>;
extern template class ConvLayer<double>;
extern template class ResidualBlock<float>;
extern template class ResidualBlock<double>;
extern template class UNet<float>;
extern template class UNet<double>;

}  // namespace xaug
