#include "xaug/unet.hpp"

#include <cmath>

#include "xaug/rng.hpp"

namespace xaug {

void NetworkConfig::validate() const {
  if (depth < 1) fail(ErrorKind::InvalidConfig, "network depth must be >= 1");
  if (base_filters < 1) fail(ErrorKind::InvalidConfig, "base_filters must be >= 1");
  if (patch_size < 1 || patch_size % (1 << depth) != 0)
    fail(ErrorKind::BadSpatialSize, "patch size " + std::to_string(patch_size) + " not divisible by 2^depth");
}

std::vector<int> NetworkConfig::stage_channels() const {
  std::vector<int> ch;
  for (int i = 0; i <= depth; ++i) ch.push_back(base_filters << i);
  return ch;
}

// ---------------------------------------------------------------------------

template <class T>
ConvLayer<T>::ConvLayer(std::string name, ConvShape shape) : shape_(shape) {
  weight_.name = name + ".weight";
  weight_.shape = {shape.out_ch, shape.in_ch, shape.kernel, shape.kernel};
  weight_.value.assign(shape.weight_count(), T{0});
  weight_.grad.assign(shape.weight_count(), T{0});
  bias_.name = std::move(name) + ".bias";
  bias_.shape = {shape.out_ch};
  bias_.value.assign(static_cast<std::size_t>(shape.out_ch), T{0});
  bias_.grad.assign(static_cast<std::size_t>(shape.out_ch), T{0});
}

template <class T>
Tensor4<T> ConvLayer<T>::forward(const Tensor4<T>& x) {
  input_ = x;
  return conv_forward<T>(x, weight_.value, bias_.value, shape_);
}

template <class T>
Tensor4<T> ConvLayer<T>::backward(const Tensor4<T>& grad_out) {
  Tensor4<T> gx;
  conv_backward<T>(input_, weight_.value, grad_out, shape_, &gx, weight_.grad, bias_.grad);
  return gx;
}

// ---------------------------------------------------------------------------

template <class T>
ResidualBlock<T>::ResidualBlock(const std::string& name, int in_ch, int out_ch)
    : conv1_(name + ".conv1", ConvShape{in_ch, out_ch, 3}), conv2_(name + ".conv2", ConvShape{out_ch, out_ch, 3}) {
  if (in_ch != out_ch) proj_.emplace(name + ".proj", ConvShape{in_ch, out_ch, 1});
}

template <class T>
Tensor4<T> ResidualBlock<T>::forward(const Tensor4<T>& x) {
  if (x.c != in_channels()) fail(ErrorKind::ShapeMismatch, "residual block input channels");
  pre1_ = conv1_.forward(x);
  Tensor4<T> h = pre1_;
  relu_inplace(h);
  pre_out_ = conv2_.forward(h);
  if (proj_) {
    const Tensor4<T> skip = proj_->forward(x);
    for (std::size_t i = 0; i < pre_out_.size(); ++i) pre_out_.values[i] += skip.values[i];
  } else {
    for (std::size_t i = 0; i < pre_out_.size(); ++i) pre_out_.values[i] += x.values[i];
  }
  Tensor4<T> y = pre_out_;
  relu_inplace(y);
  return y;
}

template <class T>
Tensor4<T> ResidualBlock<T>::backward(const Tensor4<T>& grad_out) {
  Tensor4<T> g = grad_out;
  relu_backward_inplace(g, pre_out_);
  Tensor4<T> gh = conv2_.backward(g);
  relu_backward_inplace(gh, pre1_);
  Tensor4<T> gx = conv1_.backward(gh);
  if (proj_) {
    const Tensor4<T> gskip = proj_->backward(g);
    for (std::size_t i = 0; i < gx.size(); ++i) gx.values[i] += gskip.values[i];
  } else {
    for (std::size_t i = 0; i < gx.size(); ++i) gx.values[i] += g.values[i];
  }
  return gx;
}

template <class T>
void ResidualBlock<T>::collect(std::vector<Param<T>*>& out) {
  conv1_.collect(out);
  conv2_.collect(out);
  if (proj_) proj_->collect(out);
}

// ---------------------------------------------------------------------------

template <class T>
UNet<T>::UNet(const NetworkConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const auto ch = cfg_.stage_channels();
  const int depth = cfg_.depth;
  for (int i = 0; i < depth; ++i)
    enc_.emplace_back("enc" + std::to_string(i), i == 0 ? 1 : ch[i - 1], ch[i]);
  center_ = ResidualBlock<T>("center", ch[depth - 1], ch[depth]);
  dec_.resize(static_cast<std::size_t>(depth));
  for (int i = depth - 1; i >= 0; --i) dec_[i] = ResidualBlock<T>("dec" + std::to_string(i), ch[i + 1] + ch[i], ch[i]);
  head_ = ConvLayer<T>("head", ConvShape{ch[0], 1, 1});
  init_he<T>(parameters(), cfg_.seed);
}

template <class T>
Tensor4<T> UNet<T>::forward(const Tensor4<T>& x) {
  const int p = cfg_.patch_size;
  if (x.c != 1 || x.h != p || x.w != p)
    fail(ErrorKind::BadSpatialSize, "network expects N x 1 x " + std::to_string(p) + " x " + std::to_string(p));
  const int depth = cfg_.depth;
  pool_argmax_.assign(static_cast<std::size_t>(depth), {});
  pool_input_dims_.assign(static_cast<std::size_t>(depth), {});

  std::vector<Tensor4<T>> skips(static_cast<std::size_t>(depth));
  Tensor4<T> cur = x;
  for (int i = 0; i < depth; ++i) {
    skips[i] = enc_[i].forward(cur);
    auto pooled = maxpool2x2_forward(skips[i]);
    pool_argmax_[i] = std::move(pooled.argmax);
    pool_input_dims_[i] = {skips[i].n, skips[i].c, skips[i].h, skips[i].w};
    cur = std::move(pooled.out);
  }
  cur = center_.forward(cur);
  up_channels_.assign(static_cast<std::size_t>(depth), 0);
  for (int i = depth - 1; i >= 0; --i) {
    Tensor4<T> up = upsample_nearest2x_forward(cur);
    up_channels_[i] = up.c;
    cur = dec_[i].forward(concat_channels(up, skips[i]));
  }
  prob_ = sigmoid_forward(head_.forward(cur));
  check_finite(prob_);
  return prob_;
}

template <class T>
Tensor4<T> UNet<T>::backward(const Tensor4<T>& grad_prob) {
  require_same_shape(grad_prob, prob_, "gradient does not match the last forward output");
  const int depth = cfg_.depth;
  Tensor4<T> g = head_.backward(sigmoid_backward(grad_prob, prob_));
  std::vector<Tensor4<T>> skip_grads(static_cast<std::size_t>(depth));
  for (int i = 0; i < depth; ++i) {
    auto [gup, gskip] = split_channels(dec_[i].backward(g), up_channels_[i]);
    skip_grads[i] = std::move(gskip);
    g = upsample_nearest2x_backward(gup);
  }
  g = center_.backward(g);
  for (int i = depth - 1; i >= 0; --i) {
    const auto& d = pool_input_dims_[i];
    Tensor4<T> gs = maxpool2x2_backward(g, pool_argmax_[i], Tensor4<T>(d[0], d[1], d[2], d[3]));
    for (std::size_t k = 0; k < gs.size(); ++k) gs.values[k] += skip_grads[i].values[k];
    g = enc_[i].backward(gs);
  }
  return g;
}

template <class T>
std::vector<Param<T>*> UNet<T>::parameters() {
  std::vector<Param<T>*> out;
  for (auto& b : enc_) b.collect(out);
  center_.collect(out);
  for (int i = cfg_.depth - 1; i >= 0; --i) dec_[i].collect(out);
  head_.collect(out);
  return out;
}

template <class T>
std::vector<const Param<T>*> UNet<T>::parameters() const {
  auto mut = const_cast<UNet*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

template <class T>
std::size_t UNet<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->value.size();
  return n;
}

template <class T>
void UNet<T>::zero_grad() {
  for (auto* p : parameters()) std::fill(p->grad.begin(), p->grad.end(), T{0});
}

template <class T>
void init_he(std::vector<Param<T>*> params, std::uint64_t seed) {
  for (std::size_t k = 0; k < params.size(); ++k) {
    Param<T>& p = *params[k];
    if (p.shape.size() != 4) {
      std::fill(p.value.begin(), p.value.end(), T{0});
      continue;
    }
    const double fan_in = static_cast<double>(p.shape[1]) * p.shape[2] * p.shape[3];
    const double sigma = std::sqrt(2.0 / fan_in);
    SeedStream stream(derive_seed(seed, k));
    for (T& v : p.value) v = static_cast<T>(stream.normal(0.0, sigma));
  }
}

template class ConvLayer<float>;
template class ConvLayer<double>;
template class ResidualBlock<float>;
template class ResidualBlock<double>;
template class UNet<float>;
template class UNet<double>;
template void init_he<float>(std::vector<Param<float>*>, std::uint64_t);
template void init_he<double>(std::vector<Param<double>*>, std::uint64_t);

}  // namespace xaug
