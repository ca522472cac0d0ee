#include "xaug/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

namespace xaug {
namespace {

float sample_bilinear(const Image2D& img, double px, double py) {
  const double fx0 = std::floor(px), fy0 = std::floor(py);
  const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
  const double fx = px - fx0, fy = py - fy0;
  auto pixel = [&](int x, int y) -> double {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return 0.0;
    return img.at(x, y);
  };
  const double v = (1.0 - fx) * (1.0 - fy) * pixel(x0, y0) + fx * (1.0 - fy) * pixel(x0 + 1, y0) +
                   (1.0 - fx) * fy * pixel(x0, y0 + 1) + fx * fy * pixel(x0 + 1, y0 + 1);
  return static_cast<float>(v);
}

std::uint8_t sample_nearest(const Mask2D& mask, double px, double py) {
  const double rx = std::floor(px + 0.5), ry = std::floor(py + 0.5);
  if (rx < 0.0 || ry < 0.0 || rx >= mask.width || ry >= mask.height) return 0;
  return mask.at(static_cast<int>(rx), static_cast<int>(ry));
}

}  // namespace

double scaled_translation_limit(int patch_size) {
  return std::round(kPaperTranslationLimit * patch_size / kPaperPatchSize);
}

void AugmentConfig::validate() const {
  if (level < 0) fail(ErrorKind::InvalidConfig, "augmentation level must be >= 0");
  if (level == 0 && !include_original)
    fail(ErrorKind::InvalidConfig, "level 0 without originals yields an empty dataset");
  for (const Range& r : {angle_deg, scale, translation})
    if (!(r.lo <= r.hi)) fail(ErrorKind::InvalidConfig, "range lower bound exceeds upper bound");
  if (!(scale.lo > 0.0)) fail(ErrorKind::InvalidConfig, "scale range must be positive");
}

AffineParams sample_params(SeedStream& stream, const AugmentConfig& cfg) {
  AffineParams p;
  p.angle_deg = stream.uniform(cfg.angle_deg.lo, cfg.angle_deg.hi);
  p.scale = stream.uniform(cfg.scale.lo, cfg.scale.hi);
  p.tx = stream.uniform(cfg.translation.lo, cfg.translation.hi);
  p.ty = stream.uniform(cfg.translation.lo, cfg.translation.hi);
  return p;
}

ImageMaskPair apply_affine(const Image2D& image, const Mask2D& mask, const AffineParams& params) {
  if (image.width != mask.width || image.height != mask.height)
    fail(ErrorKind::DimensionMismatch, "image and mask dims differ");
  if (!(params.scale > 0.0)) fail(ErrorKind::InvalidConfig, "scale must be positive");

  const int w = image.width, h = image.height;
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  const double theta = params.angle_deg * std::numbers::pi / 180.0;
  // Inverse linear part: Scale(1/s) o Rotate(-angle).
  const double c = std::cos(theta) / params.scale, s = std::sin(theta) / params.scale;

  ImageMaskPair out{Image2D(w, h), Mask2D(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = x - params.tx - cx, dy = y - params.ty - cy;
      const double px = cx + c * dx + s * dy;
      const double py = cy - s * dx + c * dy;
      out.image.at(x, y) = sample_bilinear(image, px, py);
      out.mask.at(x, y) = sample_nearest(mask, px, py);
    }
  }
  return out;
}

std::vector<ImageMaskPair> augment_dataset(const std::vector<ImageMaskPair>& pairs, const AugmentConfig& cfg,
                                           int jobs) {
  cfg.validate();
  const std::size_t n = pairs.size();
  const std::size_t level = static_cast<std::size_t>(cfg.level);
  const std::size_t base = cfg.include_original ? n : 0;
  std::vector<ImageMaskPair> out(base + n * level);
  if (cfg.include_original) std::copy(pairs.begin(), pairs.end(), out.begin());

  const std::size_t total = n * level;
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t i = k / level, j = k % level;
      SeedStream stream(derive_seed(cfg.seed, i, j));
      const AffineParams p = sample_params(stream, cfg);
      out[base + k] = apply_affine(pairs[i].image, pairs[i].mask, p);
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, std::max<std::size_t>(total, 1));
  if (workers == 1) {
    work(0, total);
  } else {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (total + workers - 1) / workers;
    for (std::size_t t = 0; t < workers; ++t) {
      const std::size_t b = std::min(total, t * chunk), e = std::min(total, b + chunk);
      threads.emplace_back(work, b, e);
    }
  }
  return out;
}

}  // namespace xaug
