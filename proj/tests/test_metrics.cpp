#include <doctest.h>

#include "xaug/error.hpp"
#include "xaug/layers.hpp"
#include "xaug/metrics.hpp"
#include "xaug/rng.hpp"

using namespace xaug;

namespace {

Mask2D mask_of(int w, int h, std::initializer_list<int> ones) {
  Mask2D m(w, h);
  for (int i : ones) m.pixels[static_cast<std::size_t>(i)] = 1;
  return m;
}

MaskVolume random_mask(Dims3 d, double p, std::uint64_t seed) {
  MaskVolume m(d);
  SeedStream s(seed);
  for (auto& v : m.data) v = s.unit_closed() < p ? 1 : 0;
  return m;
}

}  // namespace

TEST_CASE("hand-computed Dice values") {
  // |A| = 2, |B| = 2, overlap 1 -> 2/4.
  CHECK(dice_score(mask_of(2, 2, {0, 1}), mask_of(2, 2, {1, 2})) == doctest::Approx(0.5));
  CHECK(dice_score(mask_of(2, 2, {0, 1}), mask_of(2, 2, {0, 1})) == 1.0);
  CHECK(dice_score(mask_of(2, 2, {0}), mask_of(2, 2, {3})) == 0.0);
  CHECK(dice_score(mask_of(2, 2, {}), mask_of(2, 2, {})) == 1.0);
  CHECK(dice_score(mask_of(2, 2, {}), mask_of(2, 2, {1})) == 0.0);
}

TEST_CASE("Dice is symmetric and bounded") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = random_mask(Dims3{6, 5, 3}, 0.3, s), b = random_mask(Dims3{6, 5, 3}, 0.4, s + 100);
    const double d = dice_score(a, b);
    CHECK(d == dice_score(b, a));
    CHECK((d >= 0.0 && d <= 1.0));
    CHECK(dice_score(a, a) == 1.0);
  }
}

TEST_CASE("cohort mean") {
  MaskVolume full(Dims3{2, 2, 1}), half(Dims3{2, 2, 1}), empty(Dims3{2, 2, 1});
  std::fill(full.data.begin(), full.data.end(), 1);
  half.data = {1, 1, 0, 0};
  // Scores 1.0 and 2*2/(4+2) = 2/3 -> mean 5/6; then 0.4 and 1.0 -> 0.7.
  CHECK(mean_dice({full, half}, {full, full}) == doctest::Approx(5.0 / 6.0));
  MaskVolume a(Dims3{5, 1, 1}), b(Dims3{5, 1, 1});
  a.data = {1, 1, 1, 1, 0};
  b.data = {1, 0, 0, 0, 0};
  CHECK(mean_dice({a, empty}, {b, empty}) == doctest::Approx(0.7));
  CHECK_THROWS_AS(mean_dice({}, {}), Error);
  CHECK_THROWS_AS(mean_dice({full}, {}), Error);
}

TEST_CASE("per-slice mode averages axial slices") {
  MaskVolume p(Dims3{2, 1, 2}), t(Dims3{2, 1, 2});
  p.data = {1, 0, 1, 1};
  t.data = {1, 0, 1, 0};
  // Slice 0: 1.0; slice 1: 2/3.
  CHECK(mean_dice({p}, {t}, DiceMode::PerSlice) == doctest::Approx(5.0 / 6.0));
  CHECK(mean_dice({p}, {t}, DiceMode::PerVolume) == doctest::Approx(0.8));
}

TEST_CASE("dimension mismatch is rejected") {
  CHECK_THROWS_AS(dice_score(MaskVolume(Dims3{2, 2, 1}), MaskVolume(Dims3{2, 2, 2})), Error);
  CHECK_THROWS_AS(dice_score(Mask2D(2, 2), Mask2D(3, 2)), Error);
}

TEST_CASE("soft Dice with eps 0 on binary predictions equals the hard score") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Mask2D a(8, 8), b(8, 8);
    SeedStream r(s);
    for (auto& v : a.pixels) v = r.unit_closed() < 0.3 ? 1 : 0;
    for (auto& v : b.pixels) v = r.unit_closed() < 0.5 ? 1 : 0;
    const Mask2D* pa = &a;
    const Mask2D* pb = &b;
    const auto ta = masks_to_tensor<double>(std::span<const Mask2D* const>(&pa, 1));
    const auto tb = masks_to_tensor<double>(std::span<const Mask2D* const>(&pb, 1));
    const auto r0 = soft_dice_loss(ta, tb, DiceLossConfig{0.0});
    CHECK(r0.dice == dice_score(a, b));
    CHECK(1.0 - r0.loss == doctest::Approx(dice_score(a, b)).epsilon(1e-15));
  }
}
