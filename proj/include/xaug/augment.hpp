#pragma once

#include <cstdint>
#include <vector>

#include "xaug/rng.hpp"
#include "xaug/volume.hpp"

namespace xaug {

struct Range {
  double lo = 0.0, hi = 0.0;
  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

/// One sampled augmentation transform.
struct AffineParams {
  double angle_deg = 0.0;
  double scale = 1.0;
  double tx = 0.0;
  double ty = 0.0;

  /// Determinant of the 2x2 linear part (scale^2; never negative).
  double determinant() const noexcept { return scale * scale; }
  bool operator==(const AffineParams&) const = default;
};

inline constexpr double kPaperPatchSize = 128.0;
inline constexpr double kPaperTranslationLimit = 50.0;

/// +/-50 px at a 128 px patch, scaled to the given patch size and rounded.
double scaled_translation_limit(int patch_size);

struct AugmentConfig {
  /// Transformed copies per source pair (the "Nx" level). 0 means no augmentation.
  int level = 5;
  Range angle_deg{-20.0, 20.0};
  Range scale{0.8, 1.2};
  Range translation{-kPaperTranslationLimit, kPaperTranslationLimit};
  std::uint64_t seed = 0;
  bool include_original = true;

  void validate() const;
};

/// Draws angle, scale, tx, ty independently and uniformly from the closed ranges.
AffineParams sample_params(SeedStream& stream, const AugmentConfig& cfg);

/// Output pixel q samples the input at T^-1(q), with
/// T = Translate(t) o Translate(c) o Rotate(angle) o Scale(s) o Translate(-c)
/// and c the patch center. Images are sampled bilinearly, masks by nearest
/// neighbour; sources outside the patch read as 0.
ImageMaskPair apply_affine(const Image2D& image, const Mask2D& mask, const AffineParams& params);

/// Originals (when include_original) followed by `level` transformed copies
/// of each pair, grouped by source pair. Copy j of pair i draws from a stream
/// seeded by (cfg.seed, i, j), so output does not depend on `jobs`.
std::vector<ImageMaskPair> augment_dataset(const std::vector<ImageMaskPair>& pairs, const AugmentConfig& cfg,
                                           int jobs = 1);

}  // namespace xaug
