#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "xaug/augment.hpp"
#include "xaug/error.hpp"
#include "xaug/rng.hpp"

using namespace xaug;

namespace {

ImageMaskPair random_pair(int p, std::uint64_t seed) {
  ImageMaskPair pr{Image2D(p, p), Mask2D(p, p)};
  SeedStream s(seed);
  for (float& v : pr.image.pixels) v = static_cast<float>(s.unit_closed());
  for (int y = p / 4; y < 3 * p / 4; ++y)
    for (int x = p / 4; x < p / 2; ++x) pr.mask.pixels[static_cast<std::size_t>(y) * p + x] = 1;
  return pr;
}

std::vector<ImageMaskPair> random_pairs(int count, int p) {
  std::vector<ImageMaskPair> v;
  for (int i = 0; i < count; ++i) v.push_back(random_pair(p, 100 + i));
  return v;
}

std::pair<double, double> centroid(const Mask2D& m) {
  double sx = 0, sy = 0, n = 0;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      if (m.pixels[static_cast<std::size_t>(y) * m.width + x]) {
        sx += x;
        sy += y;
        n += 1;
      }
  return {sx / n, sy / n};
}

}  // namespace

TEST_CASE("translation limit scales with patch size") {
  CHECK(scaled_translation_limit(128) == doctest::Approx(50.0));
  CHECK(scaled_translation_limit(256) == doctest::Approx(100.0));
  CHECK(scaled_translation_limit(32) == doctest::Approx(13.0));  // 12.5 rounds up
}

TEST_CASE("dataset size is originals plus level copies per pair") {
  AugmentConfig cfg;
  cfg.translation = {-13, 13};
  cfg.level = 5;
  CHECK(augment_dataset(random_pairs(9, 16), cfg).size() == 54);
  cfg.level = 50;
  CHECK(augment_dataset(random_pairs(1, 16), cfg).size() == 51);
  cfg.include_original = false;
  CHECK(augment_dataset(random_pairs(3, 16), cfg).size() == 150);
  cfg.level = 0;
  cfg.include_original = true;
  const auto pairs = random_pairs(4, 16);
  const auto out = augment_dataset(pairs, cfg);
  REQUIRE(out.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(out[i].image.pixels == pairs[i].image.pixels);
}

TEST_CASE("originals come first in input order") {
  AugmentConfig cfg;
  cfg.level = 2;
  const auto pairs = random_pairs(3, 16);
  const auto out = augment_dataset(pairs, cfg);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(out[i].image.pixels == pairs[i].image.pixels);
    CHECK(out[i].mask.pixels == pairs[i].mask.pixels);
  }
}

TEST_CASE("config validation") {
  AugmentConfig cfg;
  cfg.level = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.level = 0;
  cfg.include_original = false;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = AugmentConfig{};
  cfg.scale = {1.2, 0.8};
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = AugmentConfig{};
  cfg.scale = {0.0, 1.0};
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("sampled parameters stay in the closed ranges and cover them") {
  AugmentConfig cfg;
  SeedStream s(42);
  double amin = 1e9, amax = -1e9, smin = 1e9, smax = -1e9, tmin = 1e9, tmax = -1e9;
  double asum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto p = sample_params(s, cfg);
    REQUIRE(cfg.angle_deg.contains(p.angle_deg));
    REQUIRE(cfg.scale.contains(p.scale));
    REQUIRE(cfg.translation.contains(p.tx));
    REQUIRE(cfg.translation.contains(p.ty));
    REQUIRE(p.determinant() > 0.0);
    amin = std::min(amin, p.angle_deg);
    amax = std::max(amax, p.angle_deg);
    smin = std::min(smin, p.scale);
    smax = std::max(smax, p.scale);
    tmin = std::min(tmin, p.tx);
    tmax = std::max(tmax, p.tx);
    asum += p.angle_deg;
  }
  // Order statistics of n uniforms: the extremes sit within ~1e-3 of the bounds.
  CHECK(amin < -19.99);
  CHECK(amax > 19.99);
  CHECK(smin < 0.8005);
  CHECK(smax > 1.1995);
  CHECK(tmin < -49.95);
  CHECK(tmax > 49.95);
  // Mean of U(-20, 20): sd of the sample mean is 40/sqrt(12 n) ~ 0.037.
  CHECK(std::abs(asum / n) < 0.2);
}

TEST_CASE("degenerate range returns its endpoint") {
  AugmentConfig cfg;
  cfg.angle_deg = {7, 7};
  cfg.scale = {1, 1};
  cfg.translation = {0, 0};
  SeedStream s(1);
  const auto p = sample_params(s, cfg);
  CHECK(p == AffineParams{7, 1, 0, 0});
}

TEST_CASE("identity parameters reproduce the input exactly") {
  const auto pr = random_pair(32, 5);
  const auto out = apply_affine(pr.image, pr.mask, AffineParams{});
  CHECK(out.image.pixels == pr.image.pixels);
  CHECK(out.mask.pixels == pr.mask.pixels);
}

TEST_CASE("integer translation shifts columns and zero-fills") {
  const auto pr = random_pair(32, 6);
  const auto out = apply_affine(pr.image, pr.mask, AffineParams{0, 1, 10, 0});
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * 32 + x;
      if (x < 10) {
        CHECK(out.image.pixels[i] == 0.0f);
        CHECK(out.mask.pixels[i] == 0);
      } else {
        CHECK(out.image.pixels[i] == pr.image.pixels[i - 10]);
        CHECK(out.mask.pixels[i] == pr.mask.pixels[i - 10]);
      }
    }
}

TEST_CASE("rotation by 90 degrees about the center moves the mask centroid") {
  Mask2D m(33, 33);
  Image2D img(33, 33);
  for (int y = 14; y <= 18; ++y)
    for (int x = 24; x <= 28; ++x) m.pixels[static_cast<std::size_t>(y) * 33 + x] = 1;
  const auto before = centroid(m);
  const auto out = apply_affine(img, m, AffineParams{90, 1, 0, 0});
  const auto after = centroid(out.mask);
  // Rotating (dx, dy) = (10, 0) from the center (16, 16) by +90 gives (0, 10) in image coordinates.
  const double dx = before.first - 16, dy = before.second - 16;
  CHECK(after.first - 16 == doctest::Approx(-dy).epsilon(1e-6));
  CHECK(after.second - 16 == doctest::Approx(dx).epsilon(1e-6));
}

TEST_CASE("scaling about the center preserves the centroid of a centered mask") {
  Mask2D m(33, 33);
  Image2D img(33, 33);
  for (int y = 12; y <= 20; ++y)
    for (int x = 12; x <= 20; ++x) m.pixels[static_cast<std::size_t>(y) * 33 + x] = 1;
  const auto out = apply_affine(img, m, AffineParams{0, 1.2, 0, 0});
  const auto c = centroid(out.mask);
  CHECK(c.first == doctest::Approx(16.0));
  CHECK(c.second == doctest::Approx(16.0));
  const auto count = std::count(out.mask.pixels.begin(), out.mask.pixels.end(), 1);
  CHECK(count > 81);
}

TEST_CASE("augmented masks stay binary and images stay in the input range") {
  AugmentConfig cfg;
  cfg.level = 20;
  cfg.translation = {-13, 13};
  cfg.seed = 9;
  for (const auto& pr : augment_dataset(random_pairs(3, 32), cfg)) {
    for (auto v : pr.mask.pixels) REQUIRE((v == 0 || v == 1));
    for (auto v : pr.image.pixels) REQUIRE((v >= 0.0f && v <= 1.0f));
  }
}

TEST_CASE("output does not depend on the job count") {
  AugmentConfig cfg;
  cfg.level = 7;
  cfg.seed = 3;
  cfg.translation = {-5, 5};
  const auto pairs = random_pairs(5, 24);
  const auto a = augment_dataset(pairs, cfg, 1);
  const auto b = augment_dataset(pairs, cfg, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].image.pixels == b[i].image.pixels);
    CHECK(a[i].mask.pixels == b[i].mask.pixels);
  }
  cfg.seed = 4;
  const auto c = augment_dataset(pairs, cfg, 1);
  CHECK(c[5].image.pixels != a[5].image.pixels);
}

TEST_CASE("mismatched image and mask are rejected") {
  CHECK_THROWS_AS(apply_affine(Image2D(8, 8), Mask2D(8, 9), AffineParams{}), Error);
}
