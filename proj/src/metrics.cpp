#include "xaug/metrics.hpp"

#include <span>

namespace xaug {
namespace {

double dice_of(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  std::size_t inter = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] != 0, y = b[i] != 0;
    na += x;
    nb += y;
    inter += x && y;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

double volume_dice(const MaskVolume& a, const MaskVolume& b, DiceMode mode) {
  if (a.dims != b.dims) fail(ErrorKind::DimensionMismatch, "mask volumes differ in dims");
  if (mode == DiceMode::PerVolume) return dice_of(a.data, b.data);
  double sum = 0.0;
  for (int z = 0; z < a.dims.nz; ++z) sum += dice_of(a.slice(z), b.slice(z));
  return sum / a.dims.nz;
}

}  // namespace

double dice_score(const MaskVolume& a, const MaskVolume& b) { return volume_dice(a, b, DiceMode::PerVolume); }

double dice_score(const Mask2D& a, const Mask2D& b) {
  if (a.width != b.width || a.height != b.height) fail(ErrorKind::DimensionMismatch, "masks differ in dims");
  return dice_of(a.pixels, b.pixels);
}

double mean_dice(const std::vector<MaskVolume>& pred, const std::vector<MaskVolume>& truth, DiceMode mode) {
  if (pred.empty()) fail(ErrorKind::EmptyCohort, "no volumes to score");
  if (pred.size() != truth.size()) fail(ErrorKind::DimensionMismatch, "prediction and truth cohorts differ in size");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += volume_dice(pred[i], truth[i], mode);
  return sum / static_cast<double>(pred.size());
}

}  // namespace xaug
