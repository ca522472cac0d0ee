#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "xaug/volume.hpp"

namespace xaug::nifti {

inline constexpr int kHeaderSize = 348;
inline constexpr int kDataOffset = 352;

enum Datatype : std::int16_t {
  kUint8 = 2,
  kInt16 = 4,
  kFloat32 = 16,
};

/// The subset of the NIfTI-1 header this library reads and writes.
struct Header {
  std::int32_t sizeof_hdr = kHeaderSize;
  std::array<std::int16_t, 8> dim{};
  std::int16_t datatype = kFloat32;
  std::int16_t bitpix = 32;
  std::array<float, 8> pixdim{};
  float vox_offset = kDataOffset;
  float scl_slope = 0.0f;
  float scl_inter = 0.0f;
  std::array<char, 4> magic{'n', '+', '1', '\0'};
};

/// Parses and validates the header; reports whether the file is byte-swapped.
Header parse_header(std::span<const std::uint8_t> bytes, bool* swapped = nullptr);

Volume3D read(std::span<const std::uint8_t> bytes);
/// Reads a volume and binarizes it at 0.5.
MaskVolume read_mask(std::span<const std::uint8_t> bytes);

/// Float32, little-endian, data at offset 352.
std::vector<std::uint8_t> write(const Volume3D& vol);
/// Uint8 payload; values must be {0,1}.
std::vector<std::uint8_t> write(const MaskVolume& mask);

Volume3D load(const std::filesystem::path& path);
MaskVolume load_mask(const std::filesystem::path& path);
void save(const std::filesystem::path& path, const Volume3D& vol);
void save(const std::filesystem::path& path, const MaskVolume& mask);

}  // namespace xaug::nifti
