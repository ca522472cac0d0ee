#include "xaug/patching.hpp"

#include <algorithm>
#include <string>

namespace xaug {

void validate_tiling(const TilingConfig& cfg, int width, int height) {
  if (cfg.patch_size < 1 || cfg.stride < 1 || cfg.stride > cfg.patch_size)
    fail(ErrorKind::InvalidConfig, "tiling requires 1 <= stride <= patch_size");
  if (cfg.patch_size > std::min(width, height))
    fail(ErrorKind::PatchLargerThanSlice, "patch size " + std::to_string(cfg.patch_size) + " exceeds slice " +
                                              std::to_string(width) + "x" + std::to_string(height));
}

std::vector<int> tile_origins(int dim, const TilingConfig& cfg) {
  std::vector<int> origins;
  const int last = dim - cfg.patch_size;
  for (int o = 0; o <= last; o += cfg.stride) origins.push_back(o);
  if (origins.back() != last) origins.push_back(last);
  return origins;
}

std::size_t patch_count(const TilingConfig& cfg, int width, int height) {
  validate_tiling(cfg, width, height);
  return tile_origins(width, cfg).size() * tile_origins(height, cfg).size();
}

Image2D stitch(const std::vector<Patch<float>>& patches, int width, int height) {
  std::vector<double> sum(static_cast<std::size_t>(width) * height, 0.0);
  std::vector<int> count(sum.size(), 0);
  for (const auto& patch : patches) {
    const int pw = patch.pixels.width, ph = patch.pixels.height;
    if (patch.x0 < 0 || patch.y0 < 0 || patch.x0 + pw > width || patch.y0 + ph > height)
      fail(ErrorKind::PatchOutOfBounds, "patch at (" + std::to_string(patch.x0) + "," + std::to_string(patch.y0) +
                                            ") does not fit " + std::to_string(width) + "x" + std::to_string(height));
    for (int y = 0; y < ph; ++y) {
      const std::size_t row = static_cast<std::size_t>(patch.y0 + y) * width + patch.x0;
      for (int x = 0; x < pw; ++x) {
        sum[row + x] += patch.pixels.at(x, y);
        ++count[row + x];
      }
    }
  }
  Image2D out(width, height);
  for (std::size_t i = 0; i < sum.size(); ++i) {
    if (count[i] == 0)
      fail(ErrorKind::UncoveredPixel, "pixel (" + std::to_string(i % width) + "," + std::to_string(i / width) +
                                          ") not covered by any patch");
    out.pixels[i] = static_cast<float>(sum[i] / count[i]);
  }
  return out;
}

}  // namespace xaug

namespace xaug {

std::vector<PatchRecord> extract_training_patches(const Volume3D& image, const MaskVolume& mask,
                                                  const TilingConfig& cfg, int volume_id) {
  if (image.dims != mask.dims) fail(ErrorKind::DimensionMismatch, "image and mask volumes differ in dims");
  std::vector<PatchRecord> out;
  for (int z = 0; z < image.dims.nz; ++z) {
    auto imgs = extract_patches(extract_slice(image, z), cfg, z, volume_id);
    auto masks = extract_patches(extract_slice(mask, z), cfg, z, volume_id);
    for (std::size_t i = 0; i < imgs.size(); ++i)
      out.push_back(PatchRecord{{std::move(imgs[i].pixels), std::move(masks[i].pixels)},
                                volume_id, z, imgs[i].x0, imgs[i].y0});
  }
  return out;
}

std::vector<ImageMaskPair> pairs_of(const std::vector<PatchRecord>& records) {
  std::vector<ImageMaskPair> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.pair);
  return out;
}

}  // namespace xaug
