#include "xaug/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace xaug {
namespace {

// Source coordinate for output index i when mapping n_out samples onto n_in.
double source_coord(int i, int n_in, int n_out) {
  return static_cast<double>(i) * static_cast<double>(n_in - 1) / static_cast<double>(n_out - 1);
}

double percentile(std::vector<float> values, double pct) {
  const double rank = pct / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double a = values[lo];
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(hi), values.end());
  const double b = values[hi];
  return a + (b - a) * (rank - static_cast<double>(lo));
}

}  // namespace

Volume3D resample_axial(const Volume3D& vol, int target_x, int target_y) {
  const auto [nx, ny, nz] = vol.dims;
  if (nx < 2 || ny < 2) fail(ErrorKind::DegenerateVolume, "in-plane dims must be >= 2 to resample");
  if (target_x < 2 || target_y < 2) fail(ErrorKind::InvalidConfig, "resample target must be >= 2");

  Spacing3 spacing = vol.spacing;
  spacing.sx = static_cast<float>(spacing.sx * nx / target_x);
  spacing.sy = static_cast<float>(spacing.sy * ny / target_y);
  Volume3D out(Dims3{target_x, target_y, nz}, spacing);

  std::vector<int> x0(static_cast<std::size_t>(target_x));
  std::vector<double> fx(static_cast<std::size_t>(target_x));
  for (int i = 0; i < target_x; ++i) {
    const double sx = source_coord(i, nx, target_x);
    x0[i] = std::min(static_cast<int>(std::floor(sx)), nx - 2);
    fx[i] = sx - x0[i];
  }

  for (int z = 0; z < nz; ++z) {
    for (int j = 0; j < target_y; ++j) {
      const double sy = source_coord(j, ny, target_y);
      const int y0 = std::min(static_cast<int>(std::floor(sy)), ny - 2);
      const double fy = sy - y0;
      for (int i = 0; i < target_x; ++i) {
        const double a = vol.at(x0[i], y0, z), b = vol.at(x0[i] + 1, y0, z);
        const double c = vol.at(x0[i], y0 + 1, z), d = vol.at(x0[i] + 1, y0 + 1, z);
        const double top = fx[i] == 0.0 ? a : a + (b - a) * fx[i];
        const double bottom = fx[i] == 0.0 ? c : c + (d - c) * fx[i];
        const double v = fy == 0.0 ? top : top + (bottom - top) * fy;
        out.at(i, j, z) = static_cast<float>(v);
      }
    }
  }
  return out;
}

Volume3D intensity_match(const Volume3D& vol, const IntensityMatchOptions& opts) {
  if (vol.data.empty()) fail(ErrorKind::DegenerateVolume, "empty volume");
  const auto [mn_it, mx_it] = std::minmax_element(vol.data.begin(), vol.data.end());
  double lo = *mn_it, hi = *mx_it;
  if (opts.percentile_clip) {
    lo = percentile(vol.data, opts.lower_percentile);
    hi = percentile(vol.data, opts.upper_percentile);
  }
  if (!(hi > lo)) fail(ErrorKind::DegenerateIntensityRange, "volume has constant intensity");

  Volume3D out = vol;
  const double range = hi - lo;
  for (float& v : out.data) {
    const double mapped = (static_cast<double>(v) - lo) / range;
    v = static_cast<float>(std::clamp(mapped, 0.0, 1.0));
  }
  return out;
}

}  // namespace xaug
