#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "xaug/layers.hpp"
#include "xaug/patching.hpp"
#include "xaug/unet.hpp"
#include "xaug/volume.hpp"

namespace xaug {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

/// First/second moment accumulators, one per parameter array.
template <class T>
struct AdamState {
  std::vector<std::vector<double>> m, v;
  std::int64_t step = 0;
};

/// Bias-corrected Adam update over parallel parameter and gradient lists.
template <class T>
void adam_step(std::span<Param<T>* const> params, AdamState<T>& state, const AdamConfig& cfg) {
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.emplace_back(p->value.size(), 0.0);
      state.v.emplace_back(p->value.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) fail(ErrorKind::ShapeMismatch, "Adam state does not match parameters");
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Param<T>& p = *params[k];
    auto& m = state.m[k];
    auto& v = state.v[k];
    if (m.size() != p.value.size() || p.grad.size() != p.value.size())
      fail(ErrorKind::ShapeMismatch, "Adam: size mismatch for " + p.name);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double mhat = m[i] / c1, vhat = v[i] / c2;
      p.value[i] = static_cast<T>(p.value[i] - cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps));
    }
  }
}

struct TrainConfig {
  int epochs = 100;
  int batch_size = 8;
  std::uint64_t seed = 0;  // shuffling
  AdamConfig adam;
  DiceLossConfig dice;
  /// Workers for per-sample gradient evaluation; results do not depend on it.
  int jobs = 1;
};

struct EpochStats {
  int epoch = 0;
  double mean_dice = 0.0;  // mean soft Dice over the epoch's batches
  double mean_loss = 0.0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Minimises soft-Dice loss with Adam, reshuffling each epoch from the seed.
/// Returns the per-epoch mean training Dice.
std::vector<double> train(UNet<float>& net, const std::vector<ImageMaskPair>& data, const TrainConfig& cfg,
                          const EpochCallback& on_epoch = {});

/// Patch-wise inference over every axial slice, mean-stitched, then
/// thresholded (probability > threshold is foreground).
MaskVolume predict_volume(UNet<float>& net, const Volume3D& vol, const TilingConfig& tiling,
                          double threshold = 0.5);

/// Per-slice stitched probability maps (before thresholding).
Volume3D predict_probabilities(UNet<float>& net, const Volume3D& vol, const TilingConfig& tiling);

}  // namespace xaug
