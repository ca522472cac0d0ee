#include <doctest.h>

#include <algorithm>
#include <cstring>

#include "nifti_fixtures.hpp"
#include "xaug/nifti.hpp"
#include "xaug/rng.hpp"

using namespace xaug;
using namespace xaug::test;

namespace {

// Hand-built int16 header, independent of the writer.
std::vector<std::uint8_t> int16_file(int nx, int ny, int nz, float slope, float inter,
                                     const std::vector<std::int16_t>& raw) {
  std::vector<std::uint8_t> b(352 + raw.size() * 2, 0);
  put_le<std::int32_t>(b, 0, 348);
  const std::int16_t dim[8] = {3, static_cast<std::int16_t>(nx), static_cast<std::int16_t>(ny),
                               static_cast<std::int16_t>(nz), 1, 1, 1, 1};
  for (int i = 0; i < 8; ++i) put_le<std::int16_t>(b, 40 + 2 * i, dim[i]);
  put_le<std::int16_t>(b, 70, 4);
  put_le<std::int16_t>(b, 72, 16);
  for (int i = 0; i < 8; ++i) put_le<float>(b, 76 + 4 * i, 1.0f);
  put_le<float>(b, 108, 352.0f);
  put_le<float>(b, 112, slope);
  put_le<float>(b, 116, inter);
  std::memcpy(b.data() + 344, "n+1\0", 4);
  for (std::size_t i = 0; i < raw.size(); ++i) put_le<std::int16_t>(b, 352 + 2 * i, raw[i]);
  return b;
}

}  // namespace

TEST_CASE("int16 payload applies slope and intercept") {
  const auto bytes = int16_file(2, 2, 1, 2.0f, 1.0f, {0, 1, 2, 3});
  const auto v = nifti::read(bytes);
  CHECK(v.dims == Dims3{2, 2, 1});
  CHECK(v.data == std::vector<float>{1.0f, 3.0f, 5.0f, 7.0f});
}

TEST_CASE("zero slope leaves raw values") {
  const auto v = nifti::read(int16_file(2, 1, 1, 0.0f, 9.0f, {-4, 7}));
  CHECK(v.data == std::vector<float>{-4.0f, 7.0f});
}

TEST_CASE("native-endian header parses without swapping") {
  bool swapped = true;
  const auto h = nifti::parse_header(int16_file(1, 1, 1, 0, 0, {5}), &swapped);
  CHECK_FALSE(swapped);
  CHECK(h.sizeof_hdr == 348);
  CHECK(h.datatype == nifti::kInt16);
}

TEST_CASE("single voxel file is 352 header bytes plus 4 data bytes") {
  Volume3D v(Dims3{1, 1, 1});
  v.data[0] = 0.5f;
  const auto bytes = nifti::write(v);
  CHECK(bytes.size() == 356);
  float stored;
  std::memcpy(&stored, bytes.data() + 352, 4);
  CHECK(stored == 0.5f);
  CHECK(std::equal(bytes.begin() + 348, bytes.begin() + 352, std::vector<std::uint8_t>(4, 0).begin()));
}

TEST_CASE("float volumes round-trip bit-exactly") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto v = random_volume(seed);
    const auto back = nifti::read(nifti::write(v));
    CHECK(back == v);
    CHECK(std::memcmp(back.data.data(), v.data.data(), v.data.size() * 4) == 0);
  }
}

TEST_CASE("byte-swapped file parses to the same volume") {
  const auto v = random_volume(99);
  const auto swapped_bytes = byte_swap_float_file(nifti::write(v));
  bool swapped = false;
  nifti::parse_header(swapped_bytes, &swapped);
  CHECK(swapped);
  CHECK(nifti::read(swapped_bytes) == v);
}

TEST_CASE("masks are stored as uint8 and stay binary") {
  MaskVolume m(Dims3{3, 2, 2});
  for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = static_cast<std::uint8_t>(i % 3 == 0);
  const auto bytes = nifti::write(m);
  CHECK(nifti::parse_header(bytes).datatype == nifti::kUint8);
  CHECK(nifti::read_mask(bytes) == m);
  m.data[0] = 2;
  CHECK_THROWS_AS(nifti::write(m), Error);
}

TEST_CASE("mask reader binarizes at 0.5") {
  Volume3D v(Dims3{4, 1, 1});
  v.data = {0.0f, 0.49f, 0.5f, 3.0f};
  CHECK(nifti::read_mask(nifti::write(v)).data == std::vector<std::uint8_t>{0, 0, 1, 1});
}

TEST_CASE("header violations raise specific errors") {
  const auto good = nifti::write(random_volume(3));
  auto kind_of = [](const std::vector<std::uint8_t>& b) {
    try {
      nifti::read(b);
    } catch (const Error& e) {
      return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Io;
  };

  SUBCASE("short stream") { CHECK(kind_of(std::vector<std::uint8_t>(100, 0)) == ErrorKind::TruncatedData); }
  SUBCASE("bad sizeof_hdr") {
    auto b = good;
    put_le<std::int32_t>(b, 0, 540);
    CHECK(kind_of(b) == ErrorKind::BadHeader);
  }
  SUBCASE("bad magic") {
    auto b = good;
    b[345] = 'i';
    CHECK(kind_of(b) == ErrorKind::BadMagic);
  }
  SUBCASE("unsupported datatype") {
    auto b = good;
    put_le<std::int16_t>(b, 70, 64);
    put_le<std::int16_t>(b, 72, 64);
    CHECK(kind_of(b) == ErrorKind::UnsupportedDatatype);
  }
  SUBCASE("bitpix disagrees with datatype") {
    auto b = good;
    put_le<std::int16_t>(b, 72, 16);
    CHECK(kind_of(b) == ErrorKind::BadHeader);
  }
  SUBCASE("vox_offset inside the header") {
    auto b = good;
    put_le<float>(b, 108, 200.0f);
    CHECK(kind_of(b) == ErrorKind::BadHeader);
  }
  SUBCASE("payload truncated") {
    auto b = good;
    b.resize(b.size() - 1);
    CHECK(kind_of(b) == ErrorKind::TruncatedData);
  }
}

TEST_CASE("random corruption never crashes the parser") {
  const auto good = nifti::write(random_volume(11));
  SeedStream s(5);
  for (int trial = 0; trial < 500; ++trial) {
    auto b = good;
    for (int k = 0; k < 4; ++k) b[s.below(352)] = static_cast<std::uint8_t>(s.below(256));
    if (s.below(4) == 0) b.resize(s.below(b.size()));
    try {
      const auto v = nifti::read(b);
      CHECK(v.data.size() == v.dims.count());
    } catch (const Error&) {
    }
  }
}
