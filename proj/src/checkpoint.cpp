#include "xaug/checkpoint.hpp"

#include <algorithm>

#include "binary_io.hpp"

namespace xaug::checkpoint {

std::vector<std::uint8_t> encode(const UNet<float>& net) {
  detail::ByteWriter w;
  w.put_bytes(std::span(reinterpret_cast<const std::uint8_t*>(kMagic), 8));
  w.put<std::uint32_t>(kVersion);
  const auto& cfg = net.config();
  w.put<std::int32_t>(cfg.depth);
  w.put<std::int32_t>(cfg.base_filters);
  w.put<std::int32_t>(cfg.patch_size);
  w.put<std::uint64_t>(cfg.seed);
  const auto params = net.parameters();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(params.size()));
  for (const auto* p : params) {
    w.put_string(p->name);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(p->shape.size()));
    for (int d : p->shape) w.put<std::int32_t>(d);
    w.put<std::uint64_t>(p->value.size());
    w.put_array<float>(p->value);
  }
  return std::move(w.bytes());
}

UNet<float> decode(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  std::uint8_t magic[8];
  r.get_array<std::uint8_t>(magic);
  if (!std::equal(magic, magic + 8, reinterpret_cast<const std::uint8_t*>(kMagic)))
    fail(ErrorKind::BadMagic, "not a model checkpoint");
  if (const auto v = r.get<std::uint32_t>(); v != kVersion)
    fail(ErrorKind::BadFormat, "unsupported checkpoint version " + std::to_string(v));
  NetworkConfig cfg;
  cfg.depth = r.get<std::int32_t>();
  cfg.base_filters = r.get<std::int32_t>();
  cfg.patch_size = r.get<std::int32_t>();
  cfg.seed = r.get<std::uint64_t>();
  if (cfg.depth < 1 || cfg.depth > 16 || cfg.base_filters < 1 || cfg.base_filters > 4096)
    fail(ErrorKind::BadFormat, "implausible network configuration in checkpoint");
  UNet<float> net(cfg);
  auto params = net.parameters();
  if (r.get<std::uint32_t>() != params.size()) fail(ErrorKind::BadFormat, "parameter count mismatch");
  for (auto* p : params) {
    if (r.get_string() != p->name) fail(ErrorKind::BadFormat, "unexpected parameter, wanted " + p->name);
    const auto rank = r.get<std::uint32_t>();
    if (rank != p->shape.size()) fail(ErrorKind::BadFormat, "rank mismatch for " + p->name);
    for (int d : p->shape)
      if (r.get<std::int32_t>() != d) fail(ErrorKind::BadFormat, "shape mismatch for " + p->name);
    if (r.get<std::uint64_t>() != p->value.size()) fail(ErrorKind::BadFormat, "size mismatch for " + p->name);
    r.get_array<float>(p->value);
  }
  if (!r.at_end()) fail(ErrorKind::BadFormat, "trailing bytes after checkpoint");
  return net;
}

void save(const std::filesystem::path& path, const UNet<float>& net) {
  detail::write_file_atomic(path, encode(net));
}

UNet<float> load(const std::filesystem::path& path) { return decode(detail::read_file(path)); }

}  // namespace xaug::checkpoint
