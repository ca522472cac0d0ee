#include "xaug/volume.hpp"

namespace xaug {

MaskVolume binarize(const Volume3D& vol, float threshold) {
  MaskVolume out(vol.dims, vol.spacing);
  for (std::size_t i = 0; i < vol.data.size(); ++i) out.data[i] = vol.data[i] >= threshold ? 1 : 0;
  return out;
}

Volume3D to_volume(const MaskVolume& mask) {
  Volume3D out(mask.dims, mask.spacing);
  for (std::size_t i = 0; i < mask.data.size(); ++i) out.data[i] = static_cast<float>(mask.data[i]);
  return out;
}

}  // namespace xaug
