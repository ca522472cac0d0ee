#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "xaug/error.hpp"

namespace xaug {

struct Dims3 {
  int nx = 1, ny = 1, nz = 1;

  std::size_t count() const noexcept {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
  bool operator==(const Dims3&) const = default;
};

struct Spacing3 {
  float sx = 1.0f, sy = 1.0f, sz = 1.0f;
  bool operator==(const Spacing3&) const = default;
};

/// 3D voxel grid stored x-fastest. Shared by scans (float) and masks (uint8).
template <class T>
struct Grid3 {
  Dims3 dims;
  Spacing3 spacing;
  std::vector<T> data;

  Grid3() = default;
  Grid3(Dims3 d, Spacing3 s = {}) : dims(d), spacing(s), data(d.count(), T{}) {
    if (d.nx < 1 || d.ny < 1 || d.nz < 1) fail(ErrorKind::DegenerateVolume, "all dims must be >= 1");
  }

  std::size_t index(int x, int y, int z) const noexcept {
    return (static_cast<std::size_t>(z) * dims.ny + y) * dims.nx + x;
  }
  T& at(int x, int y, int z) noexcept { return data[index(x, y, z)]; }
  const T& at(int x, int y, int z) const noexcept { return data[index(x, y, z)]; }

  std::size_t slice_size() const noexcept { return static_cast<std::size_t>(dims.nx) * dims.ny; }
  std::span<T> slice(int z) noexcept { return {data.data() + z * slice_size(), slice_size()}; }
  std::span<const T> slice(int z) const noexcept { return {data.data() + z * slice_size(), slice_size()}; }

  bool operator==(const Grid3&) const = default;
};

using Volume3D = Grid3<float>;
using MaskVolume = Grid3<std::uint8_t>;

/// 2D image, row-major with x fastest.
template <class T>
struct Plane {
  int width = 0, height = 0;
  std::vector<T> pixels;

  Plane() = default;
  Plane(int w, int h, T fill = T{}) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  T& at(int x, int y) noexcept { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const T& at(int x, int y) const noexcept { return pixels[static_cast<std::size_t>(y) * width + x]; }

  bool operator==(const Plane&) const = default;
};

using Image2D = Plane<float>;
using Mask2D = Plane<std::uint8_t>;

template <class T>
Plane<T> extract_slice(const Grid3<T>& vol, int z) {
  Plane<T> out(vol.dims.nx, vol.dims.ny);
  const auto src = vol.slice(z);
  std::copy(src.begin(), src.end(), out.pixels.begin());
  return out;
}

template <class T>
void insert_slice(Grid3<T>& vol, int z, const Plane<T>& plane) {
  if (plane.width != vol.dims.nx || plane.height != vol.dims.ny)
    fail(ErrorKind::DimensionMismatch, "slice does not match volume in-plane dims");
  std::copy(plane.pixels.begin(), plane.pixels.end(), vol.slice(z).begin());
}

/// Binarize with threshold: value >= threshold becomes 1.
MaskVolume binarize(const Volume3D& vol, float threshold = 0.5f);
Volume3D to_volume(const MaskVolume& mask);

}  // namespace xaug

namespace xaug {

/// An image tile with its ground-truth mask; the unit of training data.
struct ImageMaskPair {
  Image2D image;
  Mask2D mask;
  bool operator==(const ImageMaskPair&) const = default;
};

}  // namespace xaug
