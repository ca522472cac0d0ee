#include "xaug/patch_io.hpp"

#include <algorithm>

#include "binary_io.hpp"

namespace xaug::patch_io {

std::vector<std::uint8_t> encode(const std::vector<PatchRecord>& records) {
  const int p = records.empty() ? 0 : records.front().pair.image.width;
  detail::ByteWriter w;
  w.put_bytes(std::span(reinterpret_cast<const std::uint8_t*>(kMagic), 8));
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint64_t>(records.size());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(p));
  for (const auto& r : records) {
    const auto& img = r.pair.image;
    const auto& msk = r.pair.mask;
    if (img.width != p || img.height != p || msk.width != p || msk.height != p)
      fail(ErrorKind::ShapeMismatch, "all patches in a set must be P x P with matching masks");
    w.put<std::int32_t>(r.volume_id);
    w.put<std::int32_t>(r.slice_index);
    w.put<std::int32_t>(r.x0);
    w.put<std::int32_t>(r.y0);
    w.put_array<float>(img.pixels);
    w.put_array<std::uint8_t>(msk.pixels);
  }
  return std::move(w.bytes());
}

std::vector<PatchRecord> decode(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  std::uint8_t magic[8];
  r.get_array<std::uint8_t>(magic);
  if (!std::equal(magic, magic + 8, reinterpret_cast<const std::uint8_t*>(kMagic)))
    fail(ErrorKind::BadMagic, "not a patch set");
  if (const auto v = r.get<std::uint32_t>(); v != kVersion)
    fail(ErrorKind::BadFormat, "unsupported patch set version " + std::to_string(v));
  const auto count = r.get<std::uint64_t>();
  const auto p = static_cast<int>(r.get<std::uint32_t>());
  const std::size_t per = static_cast<std::size_t>(p) * p;
  if (count > 0 && (p <= 0 || r.remaining() / count < 16 + per * 5))
    fail(ErrorKind::TruncatedData, "patch set shorter than its declared count");
  std::vector<PatchRecord> out(count);
  for (auto& rec : out) {
    rec.volume_id = r.get<std::int32_t>();
    rec.slice_index = r.get<std::int32_t>();
    rec.x0 = r.get<std::int32_t>();
    rec.y0 = r.get<std::int32_t>();
    rec.pair.image = Image2D(p, p);
    rec.pair.mask = Mask2D(p, p);
    r.get_array<float>(rec.pair.image.pixels);
    r.get_array<std::uint8_t>(rec.pair.mask.pixels);
    if (std::any_of(rec.pair.mask.pixels.begin(), rec.pair.mask.pixels.end(), [](std::uint8_t v) { return v > 1; }))
      fail(ErrorKind::BadFormat, "mask values must be 0 or 1");
  }
  if (!r.at_end()) fail(ErrorKind::BadFormat, "trailing bytes after patch set");
  return out;
}

void save(const std::filesystem::path& path, const std::vector<PatchRecord>& records) {
  detail::write_file_atomic(path, encode(records));
}

std::vector<PatchRecord> load(const std::filesystem::path& path) { return decode(detail::read_file(path)); }

}  // namespace xaug::patch_io
