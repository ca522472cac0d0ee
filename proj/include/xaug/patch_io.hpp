#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "xaug/patching.hpp"

namespace xaug::patch_io {

inline constexpr char kMagic[8] = {'X', 'A', 'U', 'G', 'P', 'T', 'C', 'H'};
inline constexpr std::uint32_t kVersion = 1;

// Layout (little-endian):
//   magic[8] "XAUGPTCH", u32 version, u64 count, u32 patch_size P, then per record:
//     i32 volume_id, i32 slice_index, i32 x0, i32 y0, f32 image[P*P], u8 mask[P*P]
std::vector<std::uint8_t> encode(const std::vector<PatchRecord>& records);
std::vector<PatchRecord> decode(std::span<const std::uint8_t> bytes);

void save(const std::filesystem::path& path, const std::vector<PatchRecord>& records);
std::vector<PatchRecord> load(const std::filesystem::path& path);

}  // namespace xaug::patch_io
