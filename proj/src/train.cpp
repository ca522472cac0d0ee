#include "xaug/train.hpp"

#include <algorithm>
#include <numeric>
#include <thread>

#include "xaug/rng.hpp"

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

namespace xaug {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) fail(ErrorKind::InvalidConfig, "learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    fail(ErrorKind::InvalidConfig, "Adam betas must lie in [0, 1)");
  if (!(eps > 0.0)) fail(ErrorKind::InvalidConfig, "Adam eps must be positive");
}

namespace {

// Flush-to-zero / denormals-are-zero for the current thread while in scope.
// Saturated sigmoid heads otherwise push gradients into the (very slow)
// denormal range. Applied to every compute thread, so results stay deterministic.
class DenormalGuard {
public:
#if defined(__SSE__)
  DenormalGuard() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
  ~DenormalGuard() { _mm_setcsr(saved_); }

private:
  unsigned saved_;
#endif
};

struct SampleResult {
  std::vector<std::vector<float>> grads;
  DiceSums sums;
  double dice = 0.0;
  double loss = 0.0;
};

struct SampleTensors {
  Tensor4<float> x, target;
};

SampleTensors to_tensors(const ImageMaskPair& pair) {
  const Image2D* img = &pair.image;
  const Mask2D* msk = &pair.mask;
  return {images_to_tensor<float>(std::span<const Image2D* const>(&img, 1)),
          masks_to_tensor<float>(std::span<const Mask2D* const>(&msk, 1))};
}

void keep_gradients(UNet<float>& net, SampleResult& out) {
  const auto params = net.parameters();
  out.grads.resize(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) out.grads[k] = params[k]->grad;
}

// Gradient of one sample's own soft-Dice loss, from zeroed accumulators.
void sample_gradient(UNet<float>& net, const ImageMaskPair& pair, const DiceLossConfig& dice, SampleResult& out) {
  const auto t = to_tensors(pair);
  net.zero_grad();
  const auto loss = soft_dice_loss(net.forward(t.x), t.target, dice);
  net.backward(loss.grad);
  out.dice = loss.dice;
  out.loss = loss.loss;
  keep_gradients(net, out);
}

void sample_sums(UNet<float>& net, const ImageMaskPair& pair, SampleResult& out) {
  const auto t = to_tensors(pair);
  const auto prob = net.forward(t.x);
  out.sums = dice_sums(prob.values.data(), t.target.values.data(), prob.size());
}

// This sample's share of the gradient of a Dice pooled over the batch.
void pooled_sample_gradient(UNet<float>& net, const ImageMaskPair& pair, const DiceSums& pooled, double eps,
                            SampleResult& out) {
  const auto t = to_tensors(pair);
  net.zero_grad();
  const auto prob = net.forward(t.x);
  Tensor4<float> grad(prob.n, prob.c, prob.h, prob.w);
  dice_gradient(t.target.values.data(), prob.size(), pooled, eps, 1.0, grad.values.data());
  net.backward(grad);
  keep_gradients(net, out);
}

// Runs fn(net, s) for s in [0, count): sample s goes to thread s % jobs.
template <class Fn>
void for_each_sample(std::size_t count, UNet<float>& net, std::vector<UNet<float>>& workers, const Fn& fn) {
  const std::size_t jobs = workers.size() + 1;
  if (jobs == 1) {
    for (std::size_t s = 0; s < count; ++s) fn(net, s);
    return;
  }
  std::vector<std::jthread> threads;
  for (std::size_t t = 1; t < jobs; ++t)
    threads.emplace_back([&, t] {
      const DenormalGuard worker_ftz;
      for (std::size_t s = t; s < count; s += jobs) fn(workers[t - 1], s);
    });
  for (std::size_t s = 0; s < count; s += jobs) fn(net, s);
}

std::vector<std::size_t> shuffled(std::size_t n, SeedStream& stream) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[stream.below(i)]);
  return order;
}

}  // namespace

std::vector<double> train(UNet<float>& net, const std::vector<ImageMaskPair>& data, const TrainConfig& cfg,
                          const EpochCallback& on_epoch) {
  if (cfg.epochs < 0) fail(ErrorKind::InvalidConfig, "epochs must be >= 0");
  if (cfg.epochs == 0) return {};
  if (data.empty()) fail(ErrorKind::EmptyDataset, "training set is empty");
  if (cfg.batch_size < 1) fail(ErrorKind::InvalidConfig, "batch size must be >= 1");
  cfg.adam.validate();

  const DenormalGuard ftz;
  const int jobs = std::max(1, cfg.jobs);
  std::vector<UNet<float>> workers;
  if (jobs > 1) workers.assign(static_cast<std::size_t>(jobs - 1), net);

  auto params = net.parameters();
  AdamState<float> adam;
  SeedStream shuffle_stream(derive_seed(cfg.seed, 0x5348554646ULL));
  std::vector<double> history;
  std::vector<SampleResult> results(static_cast<std::size_t>(cfg.batch_size));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = shuffled(data.size(), shuffle_stream);
    double dice_sum = 0.0, loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t bsz = std::min(static_cast<std::size_t>(cfg.batch_size), order.size() - start);
      for (auto& w : workers) {
        auto wp = w.parameters();
        for (std::size_t k = 0; k < params.size(); ++k) wp[k]->value = params[k]->value;
      }
      auto sample = [&](std::size_t s) -> const ImageMaskPair& { return data[order[start + s]]; };
      double bdice = 0.0, bloss = 0.0;
      float grad_scale = 1.0f;
      if (cfg.dice.reduction == DiceReduction::Batch) {
        for_each_sample(bsz, net, workers, [&](UNet<float>& n, std::size_t s) { sample_sums(n, sample(s), results[s]); });
        DiceSums pooled;
        for (std::size_t s = 0; s < bsz; ++s) pooled += results[s].sums;
        for_each_sample(bsz, net, workers, [&](UNet<float>& n, std::size_t s) {
          pooled_sample_gradient(n, sample(s), pooled, cfg.dice.epsilon, results[s]);
        });
        bdice = pooled.dice(cfg.dice.epsilon);
        bloss = 1.0 - bdice;
      } else {
        for_each_sample(bsz, net, workers,
                        [&](UNet<float>& n, std::size_t s) { sample_gradient(n, sample(s), cfg.dice, results[s]); });
        for (std::size_t s = 0; s < bsz; ++s) {
          bdice += results[s].dice / static_cast<double>(bsz);
          bloss += results[s].loss / static_cast<double>(bsz);
        }
        grad_scale = 1.0f / static_cast<float>(bsz);
      }

      // Fixed-order reduction: per-sample gradients summed in sample order.
      for (std::size_t k = 0; k < params.size(); ++k) {
        auto& g = params[k]->grad;
        std::fill(g.begin(), g.end(), 0.0f);
        for (std::size_t s = 0; s < bsz; ++s) {
          const auto& gs = results[s].grads[k];
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += gs[i];
        }
        if (grad_scale != 1.0f)
          for (float& v : g) v *= grad_scale;
      }
      adam_step<float>(params, adam, cfg.adam);
      dice_sum += bdice;
      loss_sum += bloss;
      ++batches;
    }
    const EpochStats stats{epoch + 1, dice_sum / static_cast<double>(batches), loss_sum / static_cast<double>(batches)};
    history.push_back(stats.mean_dice);
    if (on_epoch) on_epoch(stats);
  }
  return history;
}

Volume3D predict_probabilities(UNet<float>& net, const Volume3D& vol, const TilingConfig& tiling) {
  const DenormalGuard ftz;
  if (tiling.patch_size != net.config().patch_size)
    fail(ErrorKind::BadSpatialSize, "tiling patch size differs from the network input size");
  Volume3D out(vol.dims, vol.spacing);
  constexpr std::size_t kBatch = 16;
  for (int z = 0; z < vol.dims.nz; ++z) {
    auto patches = extract_patches(extract_slice(vol, z), tiling, z);
    for (std::size_t start = 0; start < patches.size(); start += kBatch) {
      const std::size_t end = std::min(patches.size(), start + kBatch);
      std::vector<const Image2D*> imgs;
      for (std::size_t i = start; i < end; ++i) imgs.push_back(&patches[i].pixels);
      const auto prob = net.forward(images_to_tensor<float>(imgs));
      for (std::size_t i = start; i < end; ++i) {
        const float* src = prob.channel(static_cast<int>(i - start), 0);
        std::copy(src, src + prob.plane(), patches[i].pixels.pixels.begin());
      }
    }
    insert_slice(out, z, stitch(patches, vol.dims.nx, vol.dims.ny));
  }
  return out;
}

MaskVolume predict_volume(UNet<float>& net, const Volume3D& vol, const TilingConfig& tiling, double threshold) {
  const Volume3D prob = predict_probabilities(net, vol, tiling);
  MaskVolume mask(vol.dims, vol.spacing);
  for (std::size_t i = 0; i < prob.data.size(); ++i) mask.data[i] = prob.data[i] > threshold ? 1 : 0;
  return mask;
}

}  // namespace xaug
