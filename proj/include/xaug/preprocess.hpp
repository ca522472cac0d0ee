#pragma once

#include "xaug/volume.hpp"

namespace xaug {

/// Resamples every axial (xy) slice to target_x by target_y with bilinear
/// interpolation over normalized coordinates (corner pixels map to corner
/// pixels). nz is unchanged; in-plane spacing scales by nx/target_x, ny/target_y.
Volume3D resample_axial(const Volume3D& vol, int target_x, int target_y);

struct IntensityMatchOptions {
  /// Clip to the [lower, upper] percentiles before rescaling. Off by default.
  bool percentile_clip = false;
  double lower_percentile = 0.5;
  double upper_percentile = 99.5;
};

/// Linear intensity matching to a [0,1] template: min -> 0, max -> 1.
Volume3D intensity_match(const Volume3D& vol, const IntensityMatchOptions& opts = {});

}  // namespace xaug
