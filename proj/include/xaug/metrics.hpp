#pragma once

#include <vector>

#include "xaug/volume.hpp"

namespace xaug {

/// Hard Dice 2|A n B| / (|A| + |B|); two empty masks score 1.
double dice_score(const MaskVolume& a, const MaskVolume& b);
double dice_score(const Mask2D& a, const Mask2D& b);

enum class DiceMode {
  PerVolume,  // all voxels of a volume pooled
  PerSlice,   // mean over axial slices
};

/// Arithmetic mean of per-volume scores, summed in list order.
double mean_dice(const std::vector<MaskVolume>& pred, const std::vector<MaskVolume>& truth,
                 DiceMode mode = DiceMode::PerVolume);

}  // namespace xaug
