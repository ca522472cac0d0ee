#include "xaug/phantom.hpp"

#include <algorithm>
#include <cmath>

#include "xaug/preprocess.hpp"
#include "xaug/rng.hpp"

namespace xaug {

void PhantomConfig::validate() const {
  if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1) fail(ErrorKind::InvalidConfig, "phantom dims must be >= 1");
  if (n_discs < 0) fail(ErrorKind::InvalidConfig, "n_discs must be >= 0");
  for (const Range& r : {semi_x, semi_y, semi_z, gap, gain})
    if (!(r.lo <= r.hi) || r.lo < 0.0) fail(ErrorKind::InvalidConfig, "phantom ranges must be ordered and >= 0");
  if (!(noise_sigma >= 0.0) || !(background_mean > 0.0) || !(foreground_mean > 0.0))
    fail(ErrorKind::InvalidConfig, "phantom intensities must be positive");
  if (n_discs == 0) return;
  const double worst_y = n_discs * 2.0 * semi_y.hi + (n_discs - 1) * gap.hi;
  if (worst_y > dims.ny - 1)
    fail(ErrorKind::ConfigInfeasible, "disc stack of up to " + std::to_string(worst_y) + " voxels exceeds ny");
  if (semi_x.hi + center_x_jitter + disc_x_wobble > (dims.nx - 1) / 2.0)
    fail(ErrorKind::ConfigInfeasible, "discs can leave the volume along x");
  if (semi_z.hi + center_z_jitter > (dims.nz - 1) / 2.0)
    fail(ErrorKind::ConfigInfeasible, "discs can leave the volume along z");
}

bool Ellipsoid::contains(double x, double y, double z) const noexcept {
  const double u = (x - center[0]) / semi_axes[0];
  const double v = (y - center[1]) / semi_axes[1];
  const double w = (z - center[2]) / semi_axes[2];
  return u * u + v * v + w * w <= 1.0;
}

PhantomVolume generate_phantom(const PhantomConfig& cfg, int volume_index) {
  cfg.validate();
  SeedStream rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(volume_index)));
  const auto [nx, ny, nz] = cfg.dims;

  PhantomVolume out{Volume3D(cfg.dims), MaskVolume(cfg.dims), {}};
  if (cfg.n_discs > 0) {
    const double cx = (nx - 1) / 2.0 + rng.uniform(-cfg.center_x_jitter, cfg.center_x_jitter);
    const double cz = (nz - 1) / 2.0 + rng.uniform(-cfg.center_z_jitter, cfg.center_z_jitter);
    std::vector<double> semi_y(static_cast<std::size_t>(cfg.n_discs)), gaps(semi_y.size(), 0.0);
    double extent = 0.0;
    for (std::size_t i = 0; i < semi_y.size(); ++i) {
      semi_y[i] = rng.uniform(cfg.semi_y.lo, cfg.semi_y.hi);
      extent += 2.0 * semi_y[i];
      if (i > 0) {
        gaps[i] = rng.uniform(cfg.gap.lo, cfg.gap.hi);
        extent += gaps[i];
      }
    }
    double y = rng.uniform(0.0, (ny - 1) - extent);
    for (std::size_t i = 0; i < semi_y.size(); ++i) {
      y += gaps[i] + semi_y[i];
      Ellipsoid e;
      e.center = {cx + rng.uniform(-cfg.disc_x_wobble, cfg.disc_x_wobble), y, cz};
      e.semi_axes = {rng.uniform(cfg.semi_x.lo, cfg.semi_x.hi), semi_y[i], rng.uniform(cfg.semi_z.lo, cfg.semi_z.hi)};
      out.discs.push_back(e);
      y += semi_y[i];
    }
  }

  const double gain = rng.uniform(cfg.gain.lo, cfg.gain.hi);
  for (int z = 0; z < nz; ++z)
    for (int yy = 0; yy < ny; ++yy)
      for (int x = 0; x < nx; ++x) {
        const bool inside = std::any_of(out.discs.begin(), out.discs.end(),
                                        [&](const Ellipsoid& e) { return e.contains(x, yy, z); });
        out.mask.at(x, yy, z) = inside ? 1 : 0;
        const double mean = inside ? cfg.foreground_mean : cfg.background_mean;
        out.image.at(x, yy, z) = static_cast<float>(gain * rng.normal(mean, cfg.noise_sigma));
      }
  out.image = intensity_match(out.image);
  return out;
}

}  // namespace xaug
