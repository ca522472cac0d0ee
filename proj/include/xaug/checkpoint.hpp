#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "xaug/unet.hpp"

namespace xaug::checkpoint {

inline constexpr char kMagic[8] = {'X', 'A', 'U', 'G', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kVersion = 1;

// Layout (little-endian):
//   magic[8] "XAUGCKPT", u32 version,
//   i32 depth, i32 base_filters, i32 patch_size, u64 seed,
//   u32 param_count, then per parameter:
//     u32 name_len, name bytes, u32 rank, i32 dims[rank], u64 count, f32 values[count]
std::vector<std::uint8_t> encode(const UNet<float>& net);
UNet<float> decode(std::span<const std::uint8_t> bytes);

void save(const std::filesystem::path& path, const UNet<float>& net);
UNet<float> load(const std::filesystem::path& path);

}  // namespace xaug::checkpoint
