#include "xaug/nifti.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace xaug::nifti {
namespace {

// Field offsets within the 348-byte NIfTI-1 header.
constexpr std::size_t kOffSizeofHdr = 0;
constexpr std::size_t kOffDim = 40;
constexpr std::size_t kOffDatatype = 70;
constexpr std::size_t kOffBitpix = 72;
constexpr std::size_t kOffPixdim = 76;
constexpr std::size_t kOffVoxOffset = 108;
constexpr std::size_t kOffSclSlope = 112;
constexpr std::size_t kOffSclInter = 116;
constexpr std::size_t kOffXyztUnits = 123;
constexpr std::size_t kOffMagic = 344;

class Reader {
public:
  Reader(std::span<const std::uint8_t> bytes, bool swapped) : bytes_(bytes), swapped_(swapped) {}

  template <class T>
  T get(std::size_t offset) const {
    std::array<std::uint8_t, sizeof(T)> raw{};
    std::copy_n(bytes_.begin() + static_cast<std::ptrdiff_t>(offset), sizeof(T), raw.begin());
    // Files are decoded as little-endian unless the header says otherwise.
    if (swapped_ == (std::endian::native == std::endian::little)) std::reverse(raw.begin(), raw.end());
    T value;
    std::memcpy(&value, raw.data(), sizeof(T));
    return value;
  }

private:
  std::span<const std::uint8_t> bytes_;
  bool swapped_;
};

class Writer {
public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  template <class T>
  void put(std::size_t offset, T value) {
    std::array<std::uint8_t, sizeof(T)> raw{};
    std::memcpy(raw.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    std::copy(raw.begin(), raw.end(), out_.begin() + static_cast<std::ptrdiff_t>(offset));
  }

private:
  std::vector<std::uint8_t>& out_;
};

int expected_bitpix(std::int16_t datatype) {
  switch (datatype) {
    case kUint8: return 8;
    case kInt16: return 16;
    case kFloat32: return 32;
    default: return 0;
  }
}

std::vector<std::uint8_t> encode(const Dims3& dims, const Spacing3& spacing, Datatype type) {
  constexpr int kMaxDim = 32767;
  if (dims.nx > kMaxDim || dims.ny > kMaxDim || dims.nz > kMaxDim)
    fail(ErrorKind::BadFormat, "dimension exceeds the int16 header field");
  std::vector<std::uint8_t> out(static_cast<std::size_t>(kDataOffset) +
                                dims.count() * static_cast<std::size_t>(expected_bitpix(type) / 8));
  Writer w(out);
  w.put<std::int32_t>(kOffSizeofHdr, kHeaderSize);
  const std::array<std::int16_t, 8> dim{3, static_cast<std::int16_t>(dims.nx), static_cast<std::int16_t>(dims.ny),
                                        static_cast<std::int16_t>(dims.nz), 1, 1, 1, 1};
  for (std::size_t i = 0; i < dim.size(); ++i) w.put<std::int16_t>(kOffDim + 2 * i, dim[i]);
  w.put<std::int16_t>(kOffDatatype, type);
  w.put<std::int16_t>(kOffBitpix, static_cast<std::int16_t>(expected_bitpix(type)));
  const std::array<float, 8> pixdim{1.0f, spacing.sx, spacing.sy, spacing.sz, 0.0f, 0.0f, 0.0f, 0.0f};
  for (std::size_t i = 0; i < pixdim.size(); ++i) w.put<float>(kOffPixdim + 4 * i, pixdim[i]);
  w.put<float>(kOffVoxOffset, static_cast<float>(kDataOffset));
  w.put<float>(kOffSclSlope, 0.0f);
  w.put<float>(kOffSclInter, 0.0f);
  out[kOffXyztUnits] = 2;  // mm
  const char magic[4] = {'n', '+', '1', '\0'};
  std::copy(magic, magic + 4, out.begin() + kOffMagic);
  return out;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

}  // namespace

Header parse_header(std::span<const std::uint8_t> bytes, bool* swapped_out) {
  if (bytes.size() < static_cast<std::size_t>(kDataOffset))
    fail(ErrorKind::TruncatedData, "stream shorter than 352 bytes");

  bool swapped = false;
  if (Reader(bytes, false).get<std::int32_t>(kOffSizeofHdr) != kHeaderSize) {
    if (Reader(bytes, true).get<std::int32_t>(kOffSizeofHdr) != kHeaderSize)
      fail(ErrorKind::BadHeader, "sizeof_hdr is not 348 in either byte order");
    swapped = true;
  }
  const Reader r(bytes, swapped);

  Header h;
  h.sizeof_hdr = kHeaderSize;
  std::copy_n(bytes.begin() + kOffMagic, 4, reinterpret_cast<std::uint8_t*>(h.magic.data()));
  if (h.magic[0] != 'n' || h.magic[1] != '+' || h.magic[2] != '1' || h.magic[3] != '\0')
    fail(ErrorKind::BadMagic, "expected single-file magic \"n+1\"");

  for (std::size_t i = 0; i < 8; ++i) h.dim[i] = r.get<std::int16_t>(kOffDim + 2 * i);
  h.datatype = r.get<std::int16_t>(kOffDatatype);
  h.bitpix = r.get<std::int16_t>(kOffBitpix);
  for (std::size_t i = 0; i < 8; ++i) h.pixdim[i] = r.get<float>(kOffPixdim + 4 * i);
  h.vox_offset = r.get<float>(kOffVoxOffset);
  h.scl_slope = r.get<float>(kOffSclSlope);
  h.scl_inter = r.get<float>(kOffSclInter);

  const int bits = expected_bitpix(h.datatype);
  if (bits == 0) fail(ErrorKind::UnsupportedDatatype, "datatype " + std::to_string(h.datatype));
  if (h.bitpix != bits)
    fail(ErrorKind::BadHeader, "bitpix " + std::to_string(h.bitpix) + " inconsistent with datatype");
  if (h.dim[0] < 1 || h.dim[0] > 7) fail(ErrorKind::BadHeader, "dim[0] out of range");
  for (int i = 1; i <= h.dim[0]; ++i) {
    if (h.dim[i] < 1) fail(ErrorKind::BadHeader, "non-positive dimension");
    if (i > 3 && h.dim[i] != 1) fail(ErrorKind::BadHeader, "only 3D volumes are supported");
  }
  if (!(h.vox_offset >= static_cast<float>(kDataOffset)))
    fail(ErrorKind::BadHeader, "vox_offset below 352");
  if (swapped_out) *swapped_out = swapped;
  return h;
}

Volume3D read(std::span<const std::uint8_t> bytes) {
  bool swapped = false;
  const Header h = parse_header(bytes, &swapped);
  Dims3 dims{h.dim[1], h.dim[0] >= 2 ? h.dim[2] : std::int16_t{1}, h.dim[0] >= 3 ? h.dim[3] : std::int16_t{1}};
  auto spacing_of = [&](int i) { return (h.dim[0] >= i && h.pixdim[i] > 0.0f) ? h.pixdim[i] : 1.0f; };
  const auto offset = static_cast<std::size_t>(h.vox_offset);
  const std::size_t elem = static_cast<std::size_t>(h.bitpix / 8);
  if (h.vox_offset > static_cast<float>(bytes.size()) || bytes.size() < offset + dims.count() * elem)
    fail(ErrorKind::TruncatedData, "stream shorter than vox_offset + payload");
  Volume3D vol(dims, Spacing3{spacing_of(1), spacing_of(2), spacing_of(3)});

  const Reader r(bytes, swapped);
  const bool scaled = h.scl_slope != 0.0f;
  for (std::size_t i = 0; i < dims.count(); ++i) {
    const std::size_t at = offset + i * elem;
    float raw = 0.0f;
    switch (h.datatype) {
      case kUint8: raw = static_cast<float>(bytes[at]); break;
      case kInt16: raw = static_cast<float>(r.get<std::int16_t>(at)); break;
      default: raw = r.get<float>(at); break;
    }
    vol.data[i] = scaled ? raw * h.scl_slope + h.scl_inter : raw;
  }
  return vol;
}

MaskVolume read_mask(std::span<const std::uint8_t> bytes) { return binarize(read(bytes), 0.5f); }

std::vector<std::uint8_t> write(const Volume3D& vol) {
  auto out = encode(vol.dims, vol.spacing, kFloat32);
  Writer w(out);
  for (std::size_t i = 0; i < vol.data.size(); ++i) w.put<float>(kDataOffset + 4 * i, vol.data[i]);
  return out;
}

std::vector<std::uint8_t> write(const MaskVolume& mask) {
  auto out = encode(mask.dims, mask.spacing, kUint8);
  for (std::size_t i = 0; i < mask.data.size(); ++i) {
    if (mask.data[i] > 1) fail(ErrorKind::BadFormat, "mask values must be 0 or 1");
    out[kDataOffset + i] = mask.data[i];
  }
  return out;
}

Volume3D load(const std::filesystem::path& path) { return read(slurp(path)); }
MaskVolume load_mask(const std::filesystem::path& path) { return read_mask(slurp(path)); }
void save(const std::filesystem::path& path, const Volume3D& vol) { dump(path, write(vol)); }
void save(const std::filesystem::path& path, const MaskVolume& mask) { dump(path, write(mask)); }

}  // namespace xaug::nifti
