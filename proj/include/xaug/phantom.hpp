#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "xaug/augment.hpp"
#include "xaug/volume.hpp"

namespace xaug {

/// Synthetic spine-like volume: a stack of ellipsoidal "discs" along y on a
/// noisy background. Sizes are in voxels.
struct PhantomConfig {
  Dims3 dims{64, 64, 12};
  int n_discs = 5;
  Range semi_x{8.0, 14.0};
  Range semi_y{2.5, 4.0};
  Range semi_z{2.5, 4.0};
  Range gap{2.0, 5.0};             // free space between neighbouring discs along y
  double center_x_jitter = 10.0;   // stack center offset from the volume center
  double center_z_jitter = 1.0;
  double disc_x_wobble = 2.0;      // per-disc lateral offset from the stack center
  double background_mean = 100.0;
  double foreground_mean = 160.0;
  double noise_sigma = 18.0;
  Range gain{0.8, 1.25};           // per-volume multiplicative intensity jitter
  std::uint64_t seed = 0;

  void validate() const;
};

struct Ellipsoid {
  std::array<double, 3> center{};
  std::array<double, 3> semi_axes{};

  bool contains(double x, double y, double z) const noexcept;
};

struct PhantomVolume {
  Volume3D image;  // intensity-matched to [0, 1]
  MaskVolume mask;
  std::vector<Ellipsoid> discs;
};

/// Deterministic in (cfg, volume_index).
PhantomVolume generate_phantom(const PhantomConfig& cfg, int volume_index);

}  // namespace xaug
