#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "xaug/tensor.hpp"
#include "xaug/volume.hpp"

namespace xaug {

/// Square convolution with stride 1 and zero padding kernel/2 (same-size output).
struct ConvShape {
  int in_ch = 1;
  int out_ch = 1;
  int kernel = 3;

  std::size_t weight_count() const noexcept {
    return static_cast<std::size_t>(out_ch) * in_ch * kernel * kernel;
  }
};

namespace detail {

inline void check_conv(int x_channels, std::size_t w_size, std::size_t b_size, const ConvShape& s) {
  if (s.kernel % 2 == 0) fail(ErrorKind::ShapeMismatch, "kernel size must be odd");
  if (x_channels != s.in_ch) fail(ErrorKind::ShapeMismatch, "input channel count does not match conv");
  if (w_size != s.weight_count() || b_size != static_cast<std::size_t>(s.out_ch))
    fail(ErrorKind::ShapeMismatch, "conv parameter size mismatch");
}

}  // namespace detail

/// Lowers one sample of x (C x H x W) to a (C*K*K) x (H*W) column matrix.
template <class T>
void im2col(const T* x, int channels, int H, int W, int K, std::vector<T>& col) {
  const int pad = K / 2;
  const std::size_t hw = static_cast<std::size_t>(H) * W;
  col.assign(static_cast<std::size_t>(channels) * K * K * hw, T{0});
  for (int c = 0; c < channels; ++c) {
    const T* src = x + c * hw;
    for (int u = 0; u < K; ++u) {
      const int dy = u - pad;
      const int y_lo = std::max(0, -dy), y_hi = std::min(H, H - dy);
      for (int v = 0; v < K; ++v) {
        const int dx = v - pad;
        const int x_lo = std::max(0, -dx), x_hi = std::min(W, W - dx);
        T* dst = col.data() + ((static_cast<std::size_t>(c) * K + u) * K + v) * hw;
        for (int y = y_lo; y < y_hi; ++y)
          std::copy(src + (y + dy) * W + x_lo + dx, src + (y + dy) * W + x_hi + dx, dst + y * W + x_lo);
      }
    }
  }
}

/// Adjoint of im2col: scatters column gradients back onto the image.
template <class T>
void col2im(const std::vector<T>& col, int channels, int H, int W, int K, T* gx) {
  const int pad = K / 2;
  const std::size_t hw = static_cast<std::size_t>(H) * W;
  for (int c = 0; c < channels; ++c) {
    T* dst = gx + c * hw;
    for (int u = 0; u < K; ++u) {
      const int dy = u - pad;
      const int y_lo = std::max(0, -dy), y_hi = std::min(H, H - dy);
      for (int v = 0; v < K; ++v) {
        const int dx = v - pad;
        const int x_lo = std::max(0, -dx), x_hi = std::min(W, W - dx);
        const T* src = col.data() + ((static_cast<std::size_t>(c) * K + u) * K + v) * hw;
        for (int y = y_lo; y < y_hi; ++y) {
          T* drow = dst + (y + dy) * W + dx;
          const T* srow = src + y * W;
          for (int xi = x_lo; xi < x_hi; ++xi) drow[xi] += srow[xi];
        }
      }
    }
  }
}

template <class T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {

// dst (+)= a * b. Eigen's matrix-vector and small-product kernels choose their
// summation order from the operands' memory alignment, so those shapes use a
// plain loop; everything else goes through the packed GEMM, whose order
// depends only on the dimensions.
template <class Dst, class A, class B>
void product_into(Dst&& dst, const A& a, const B& b, bool accumulate) {
  if (dst.rows() == 1 || dst.cols() == 1 || a.cols() == 1 || a.cols() + dst.rows() + dst.cols() < 24) {
    for (Eigen::Index i = 0; i < dst.rows(); ++i)
      for (Eigen::Index j = 0; j < dst.cols(); ++j) {
        auto acc = accumulate ? dst(i, j) : decltype(dst(i, j) + 0){0};
        for (Eigen::Index k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
        dst(i, j) = acc;
      }
  } else if (accumulate) {
    dst.noalias() += a * b;
  } else {
    dst.noalias() = a * b;
  }
}

}  // namespace detail

// out[n,o,i,j] = b[o] + sum_{c,u,v} w[o,c,u,v] * x_pad[n,c,i+u,j+v], evaluated
// as a (O x CKK) by (CKK x HW) product per sample.
template <class T>
Tensor4<T> conv_forward(const Tensor4<T>& x, std::span<const T> weight, std::span<const T> bias,
                        const ConvShape& s) {
  detail::check_conv(x.c, weight.size(), bias.size(), s);
  const int H = x.h, W = x.w, K = s.kernel;
  const auto hw = static_cast<Eigen::Index>(x.plane());
  const auto ckk = static_cast<Eigen::Index>(s.in_ch) * K * K;
  Tensor4<T> out(x.n, s.out_ch, H, W);
  const Eigen::Map<const RowMatrix<T>> wm(weight.data(), s.out_ch, ckk);
  const Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bv(bias.data(), s.out_ch);
  std::vector<T> col;
  for (int n = 0; n < x.n; ++n) {
    Eigen::Map<RowMatrix<T>> om(out.channel(n, 0), s.out_ch, hw);
    if (K == 1) {
      detail::product_into(om, wm, Eigen::Map<const RowMatrix<T>>(x.channel(n, 0), s.in_ch, hw), false);
    } else {
      im2col(x.channel(n, 0), s.in_ch, H, W, K, col);
      detail::product_into(om, wm, Eigen::Map<const RowMatrix<T>>(col.data(), ckk, hw), false);
    }
    om.colwise() += bv;
  }
  check_finite(out);
  return out;
}

/// Writes grad_x (when non-null) and accumulates into grad_w / grad_b.
template <class T>
void conv_backward(const Tensor4<T>& x, std::span<const T> weight, const Tensor4<T>& grad_out, const ConvShape& s,
                   Tensor4<T>* grad_x, std::span<T> grad_w, std::span<T> grad_b) {
  detail::check_conv(x.c, weight.size(), grad_b.size(), s);
  if (grad_w.size() != weight.size()) fail(ErrorKind::ShapeMismatch, "weight gradient size mismatch");
  if (grad_out.n != x.n || grad_out.c != s.out_ch || grad_out.h != x.h || grad_out.w != x.w)
    fail(ErrorKind::ShapeMismatch, "grad_out shape does not match conv output");
  const int H = x.h, W = x.w, K = s.kernel;
  const auto hw = static_cast<Eigen::Index>(x.plane());
  const auto ckk = static_cast<Eigen::Index>(s.in_ch) * K * K;
  if (grad_x) *grad_x = Tensor4<T>(x.n, x.c, H, W);
  const Eigen::Map<const RowMatrix<T>> wm(weight.data(), s.out_ch, ckk);
  Eigen::Map<RowMatrix<T>> gw(grad_w.data(), s.out_ch, ckk);
  std::vector<T> col, gcol;
  for (int n = 0; n < x.n; ++n) {
    const Eigen::Map<const RowMatrix<T>> gm(grad_out.channel(n, 0), s.out_ch, hw);
    for (int o = 0; o < s.out_ch; ++o) {
      const T* row = grad_out.channel(n, o);
      T acc = grad_b[static_cast<std::size_t>(o)];
      for (Eigen::Index j = 0; j < hw; ++j) acc += row[j];
      grad_b[static_cast<std::size_t>(o)] = acc;
    }
    if (K == 1) {
      const Eigen::Map<const RowMatrix<T>> xm(x.channel(n, 0), s.in_ch, hw);
      detail::product_into(gw, gm, xm.transpose(), true);
      if (grad_x) detail::product_into(Eigen::Map<RowMatrix<T>>(grad_x->channel(n, 0), s.in_ch, hw), wm.transpose(), gm, false);
    } else {
      im2col(x.channel(n, 0), s.in_ch, H, W, K, col);
      detail::product_into(gw, gm, Eigen::Map<const RowMatrix<T>>(col.data(), ckk, hw).transpose(), true);
      if (grad_x) {
        gcol.resize(col.size());
        detail::product_into(Eigen::Map<RowMatrix<T>>(gcol.data(), ckk, hw), wm.transpose(), gm, false);
        col2im(gcol, s.in_ch, H, W, K, grad_x->channel(n, 0));
      }
    }
  }
}

template <class T>
Tensor4<T> conv3x3_forward(const Tensor4<T>& x, std::span<const T> weight, std::span<const T> bias) {
  return conv_forward(x, weight, bias, ConvShape{x.c, static_cast<int>(bias.size()), 3});
}

template <class T>
void relu_inplace(Tensor4<T>& t) {
  for (T& v : t.values) v = v > T{0} ? v : T{0};
}

/// Zeroes grad where the pre-activation was not positive.
template <class T>
void relu_backward_inplace(Tensor4<T>& grad, const Tensor4<T>& pre) {
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!(pre.values[i] > T{0})) grad.values[i] = T{0};
}

template <class T>
struct PoolResult {
  Tensor4<T> out;
  std::vector<std::uint32_t> argmax;  // flat input index per output element
};

/// 2x2 max pooling, stride 2. Ties go to the first element in row-major window order.
template <class T>
PoolResult<T> maxpool2x2_forward(const Tensor4<T>& x) {
  if (x.h % 2 != 0 || x.w % 2 != 0) fail(ErrorKind::OddSpatialDims, "max pooling needs even H and W");
  PoolResult<T> r{Tensor4<T>(x.n, x.c, x.h / 2, x.w / 2), {}};
  r.argmax.resize(r.out.size());
  std::size_t k = 0;
  for (int n = 0; n < x.n; ++n)
    for (int c = 0; c < x.c; ++c) {
      const std::size_t base = (static_cast<std::size_t>(n) * x.c + c) * x.plane();
      for (int y = 0; y < r.out.h; ++y)
        for (int xi = 0; xi < r.out.w; ++xi, ++k) {
          std::size_t best = base + static_cast<std::size_t>(2 * y) * x.w + 2 * xi;
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const std::size_t idx = base + static_cast<std::size_t>(2 * y + dy) * x.w + 2 * xi + dx;
              if (x.values[idx] > x.values[best]) best = idx;
            }
          r.out.values[k] = x.values[best];
          r.argmax[k] = static_cast<std::uint32_t>(best);
        }
    }
  return r;
}

template <class T>
Tensor4<T> maxpool2x2_backward(const Tensor4<T>& grad_out, const std::vector<std::uint32_t>& argmax,
                               const Tensor4<T>& input_shape_like) {
  if (argmax.size() != grad_out.size()) fail(ErrorKind::ShapeMismatch, "pool argmax size mismatch");
  Tensor4<T> gx(input_shape_like.n, input_shape_like.c, input_shape_like.h, input_shape_like.w);
  for (std::size_t k = 0; k < grad_out.size(); ++k) gx.values[argmax[k]] += grad_out.values[k];
  return gx;
}

template <class T>
Tensor4<T> upsample_nearest2x_forward(const Tensor4<T>& x) {
  Tensor4<T> out(x.n, x.c, 2 * x.h, 2 * x.w);
  for (int n = 0; n < x.n; ++n)
    for (int c = 0; c < x.c; ++c)
      for (int y = 0; y < out.h; ++y)
        for (int xi = 0; xi < out.w; ++xi) out.at(n, c, y, xi) = x.at(n, c, y / 2, xi / 2);
  return out;
}

template <class T>
Tensor4<T> upsample_nearest2x_backward(const Tensor4<T>& grad_out) {
  if (grad_out.h % 2 != 0 || grad_out.w % 2 != 0) fail(ErrorKind::OddSpatialDims, "upsample grad must be even");
  Tensor4<T> gx(grad_out.n, grad_out.c, grad_out.h / 2, grad_out.w / 2);
  for (int n = 0; n < gx.n; ++n)
    for (int c = 0; c < gx.c; ++c)
      for (int y = 0; y < gx.h; ++y)
        for (int xi = 0; xi < gx.w; ++xi)
          gx.at(n, c, y, xi) = grad_out.at(n, c, 2 * y, 2 * xi) + grad_out.at(n, c, 2 * y, 2 * xi + 1) +
                               grad_out.at(n, c, 2 * y + 1, 2 * xi) + grad_out.at(n, c, 2 * y + 1, 2 * xi + 1);
  return gx;
}

/// Channel concatenation [a, b].
template <class T>
Tensor4<T> concat_channels(const Tensor4<T>& a, const Tensor4<T>& b) {
  if (a.n != b.n || a.h != b.h || a.w != b.w) fail(ErrorKind::ShapeMismatch, "concat spatial mismatch");
  Tensor4<T> out(a.n, a.c + b.c, a.h, a.w);
  for (int n = 0; n < a.n; ++n) {
    std::copy_n(a.channel(n, 0), a.c * a.plane(), out.channel(n, 0));
    std::copy_n(b.channel(n, 0), b.c * b.plane(), out.channel(n, a.c));
  }
  return out;
}

/// Inverse of concat_channels for gradients: returns (grad_a, grad_b).
template <class T>
std::pair<Tensor4<T>, Tensor4<T>> split_channels(const Tensor4<T>& g, int a_channels) {
  Tensor4<T> ga(g.n, a_channels, g.h, g.w), gb(g.n, g.c - a_channels, g.h, g.w);
  for (int n = 0; n < g.n; ++n) {
    std::copy_n(g.channel(n, 0), ga.c * g.plane(), ga.channel(n, 0));
    std::copy_n(g.channel(n, a_channels), gb.c * g.plane(), gb.channel(n, 0));
  }
  return {std::move(ga), std::move(gb)};
}

/// Logistic function, clamped so results stay strictly inside (0, 1) in T.
template <class T>
Tensor4<T> sigmoid_forward(const Tensor4<T>& z) {
  constexpr T lo = std::numeric_limits<T>::min();
  const T hi = std::nextafter(T{1}, T{0});
  Tensor4<T> p = z;
  for (T& v : p.values) {
    const double s = 1.0 / (1.0 + std::exp(-static_cast<double>(v)));
    v = std::clamp(static_cast<T>(s), lo, hi);
  }
  return p;
}

template <class T>
Tensor4<T> sigmoid_backward(const Tensor4<T>& grad_p, const Tensor4<T>& p) {
  Tensor4<T> gz = grad_p;
  for (std::size_t i = 0; i < gz.size(); ++i) gz.values[i] *= p.values[i] * (T{1} - p.values[i]);
  return gz;
}

enum class DiceReduction {
  Batch,      // one D from sums pooled over every sample in the tensor
  PerSample,  // D per sample, averaged over the batch
};

struct DiceLossConfig {
  double epsilon = 1.0;
  DiceReduction reduction = DiceReduction::Batch;
};

template <class T>
struct DiceLossResult {
  double loss = 0.0;  // 1 - D (mean over samples for PerSample)
  double dice = 0.0;
  Tensor4<T> grad;    // d loss / d pred
};

/// Sums of p*g, p and g, accumulated in double.
struct DiceSums {
  double pg = 0.0, p = 0.0, g = 0.0;
  double dice(double eps) const noexcept { return (2.0 * pg + eps) / (p + g + eps); }
  DiceSums& operator+=(const DiceSums& o) noexcept {
    pg += o.pg;
    p += o.p;
    g += o.g;
    return *this;
  }
};

template <class T>
DiceSums dice_sums(const T* p, const T* g, std::size_t count) {
  DiceSums s;
  for (std::size_t i = 0; i < count; ++i) {
    s.pg += static_cast<double>(p[i]) * g[i];
    s.p += p[i];
    s.g += g[i];
  }
  return s;
}

/// d(1 - D)/dp for the given pooled sums, scaled by `weight`.
template <class T>
void dice_gradient(const T* g, std::size_t count, const DiceSums& sums, double eps, double weight, T* out) {
  const double num = 2.0 * sums.pg + eps;
  const double den = sums.p + sums.g + eps;
  const double den2 = den * den;
  for (std::size_t i = 0; i < count; ++i) out[i] = static_cast<T>(-(2.0 * g[i] * den - num) / den2 * weight);
}

/// Soft Dice D = (2 sum(p g) + eps) / (sum p + sum g + eps), loss 1 - D.
template <class T>
DiceLossResult<T> soft_dice_loss(const Tensor4<T>& pred, const Tensor4<T>& target, const DiceLossConfig& cfg) {
  require_same_shape(pred, target, "soft Dice: pred and target shapes differ");
  DiceLossResult<T> r{0.0, 0.0, Tensor4<T>(pred.n, pred.c, pred.h, pred.w)};
  if (cfg.reduction == DiceReduction::Batch) {
    const DiceSums s = dice_sums(pred.values.data(), target.values.data(), pred.size());
    r.dice = s.dice(cfg.epsilon);
    r.loss = 1.0 - r.dice;
    dice_gradient(target.values.data(), pred.size(), s, cfg.epsilon, 1.0, r.grad.values.data());
    return r;
  }
  const std::size_t per = static_cast<std::size_t>(pred.c) * pred.plane();
  const double inv_n = 1.0 / pred.n;
  for (int n = 0; n < pred.n; ++n) {
    const DiceSums s = dice_sums(pred.channel(n, 0), target.channel(n, 0), per);
    const double d = s.dice(cfg.epsilon);
    r.dice += d * inv_n;
    r.loss += (1.0 - d) * inv_n;
    dice_gradient(target.channel(n, 0), per, s, cfg.epsilon, inv_n, r.grad.channel(n, 0));
  }
  return r;
}

/// N x 1 x P x P target tensor built from masks.
template <class T>
Tensor4<T> masks_to_tensor(std::span<const Mask2D* const> masks) {
  if (masks.empty()) return {};
  Tensor4<T> t(static_cast<int>(masks.size()), 1, masks[0]->height, masks[0]->width);
  for (std::size_t n = 0; n < masks.size(); ++n) {
    if (masks[n]->width != t.w || masks[n]->height != t.h) fail(ErrorKind::ShapeMismatch, "mask sizes differ");
    std::transform(masks[n]->pixels.begin(), masks[n]->pixels.end(), t.channel(static_cast<int>(n), 0),
                   [](std::uint8_t v) { return static_cast<T>(v); });
  }
  return t;
}

template <class T>
Tensor4<T> images_to_tensor(std::span<const Image2D* const> images) {
  if (images.empty()) return {};
  Tensor4<T> t(static_cast<int>(images.size()), 1, images[0]->height, images[0]->width);
  for (std::size_t n = 0; n < images.size(); ++n) {
    if (images[n]->width != t.w || images[n]->height != t.h) fail(ErrorKind::ShapeMismatch, "image sizes differ");
    std::transform(images[n]->pixels.begin(), images[n]->pixels.end(), t.channel(static_cast<int>(n), 0),
                   [](float v) { return static_cast<T>(v); });
  }
  return t;
}

}  // namespace xaug
