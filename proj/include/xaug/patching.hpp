#pragma once

#include <vector>

#include "xaug/volume.hpp"

namespace xaug {

struct TilingConfig {
  int patch_size = 128;
  int stride = 64;
};

template <class T>
struct Patch {
  Plane<T> pixels;
  int x0 = 0, y0 = 0;
  int slice_index = 0;
  int volume_id = 0;
};

/// Tile origins along one axis: 0, S, 2S, ... plus a final origin at
/// dim - P when dim - P is not a multiple of S.
std::vector<int> tile_origins(int dim, const TilingConfig& cfg);

void validate_tiling(const TilingConfig& cfg, int width, int height);

/// Expected patch count for a width x height slice.
std::size_t patch_count(const TilingConfig& cfg, int width, int height);

/// Row-major (y outer, x inner) list of copied patches.
template <class T>
std::vector<Patch<T>> extract_patches(const Plane<T>& slice, const TilingConfig& cfg, int slice_index = 0,
                                      int volume_id = 0) {
  validate_tiling(cfg, slice.width, slice.height);
  const int p = cfg.patch_size;
  std::vector<Patch<T>> out;
  out.reserve(patch_count(cfg, slice.width, slice.height));
  for (int y0 : tile_origins(slice.height, cfg)) {
    for (int x0 : tile_origins(slice.width, cfg)) {
      Patch<T> patch{Plane<T>(p, p), x0, y0, slice_index, volume_id};
      for (int y = 0; y < p; ++y)
        for (int x = 0; x < p; ++x) patch.pixels.at(x, y) = slice.at(x0 + x, y0 + y);
      out.push_back(std::move(patch));
    }
  }
  return out;
}

/// Reassembles per-patch values into a width x height image; each output
/// pixel is the mean of every patch value covering it, summed in list order.
Image2D stitch(const std::vector<Patch<float>>& patches, int width, int height);

}  // namespace xaug

namespace xaug {

/// An image/mask tile pair with provenance.
struct PatchRecord {
  ImageMaskPair pair;
  int volume_id = 0;
  int slice_index = 0;
  int x0 = 0, y0 = 0;
  bool operator==(const PatchRecord&) const = default;
};

/// Tiles every axial slice of a scan and its mask identically.
std::vector<PatchRecord> extract_training_patches(const Volume3D& image, const MaskVolume& mask,
                                                  const TilingConfig& cfg, int volume_id = 0);

std::vector<ImageMaskPair> pairs_of(const std::vector<PatchRecord>& records);

}  // namespace xaug
