#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "scenarios.hpp"
#include "xaug/checkpoint.hpp"
#include "xaug/error.hpp"
#include "xaug/train.hpp"

using namespace xaug;

namespace {

Param<float> scalar_param(float value, float grad) {
  return Param<float>{"p", {1}, {value}, {grad}};
}

std::vector<ImageMaskPair> tiny_dataset(int count) {
  std::vector<ImageMaskPair> d;
  SeedStream s(77);
  for (int i = 0; i < count; ++i) {
    ImageMaskPair p{Image2D(32, 32), Mask2D(32, 32)};
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        const bool fg = (x - 16 + i) * (x - 16 + i) + (y - 14) * (y - 14) < 40;
        p.mask.pixels[static_cast<std::size_t>(y) * 32 + x] = fg ? 1 : 0;
        p.image.pixels[static_cast<std::size_t>(y) * 32 + x] =
            static_cast<float>((fg ? 0.7 : 0.3) + 0.05 * s.normal());
      }
    d.push_back(p);
  }
  return d;
}

std::vector<std::vector<float>> values_of(UNet<float>& net) {
  std::vector<std::vector<float>> v;
  for (auto* p : net.parameters()) v.push_back(p->value);
  return v;
}

}  // namespace

TEST_CASE("first Adam step matches a scalar hand trace") {
  auto p = scalar_param(1.0f, 0.5f);
  Param<float>* ps[] = {&p};
  AdamState<float> st;
  const AdamConfig cfg;
  adam_step<float>(ps, st, cfg);
  // m = 0.05, v = 0.00025; bias correction gives mhat = 0.5, vhat = 0.25.
  const double expected = 1.0 - 1e-4 * 0.5 / (0.5 + 1e-8);
  CHECK(std::abs(p.value[0] - expected) < 1e-6);
  CHECK(st.step == 1);
  // Second step with the same gradient moves by the same amount.
  const float before = p.value[0];
  adam_step<float>(ps, st, cfg);
  CHECK(before - p.value[0] == doctest::Approx(1e-4).epsilon(1e-3));
}

TEST_CASE("zero gradient leaves parameters unchanged") {
  auto p = scalar_param(0.25f, 0.0f);
  Param<float>* ps[] = {&p};
  AdamState<float> st;
  for (int i = 0; i < 5; ++i) adam_step<float>(ps, st, AdamConfig{});
  CHECK(p.value[0] == 0.25f);
}

TEST_CASE("Adam config validation") {
  AdamConfig c;
  c.learning_rate = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = AdamConfig{};
  c.beta1 = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("zero epochs leave the network untouched") {
  UNet<float> net(NetworkConfig::desk());
  init_he<float>(net.parameters(), 1);
  const auto before = values_of(net);
  TrainConfig tc;
  tc.epochs = 0;
  CHECK(train(net, tiny_dataset(2), tc).empty());
  CHECK(values_of(net) == before);
}

TEST_CASE("empty dataset is rejected") {
  UNet<float> net(NetworkConfig::desk());
  TrainConfig tc;
  tc.epochs = 1;
  CHECK_THROWS_AS(train(net, {}, tc), Error);
}

TEST_CASE("training is deterministic and independent of the job count") {
  const auto data = tiny_dataset(5);
  for (auto reduction : {DiceReduction::Batch, DiceReduction::PerSample}) {
    TrainConfig tc;
    tc.epochs = 2;
    tc.batch_size = 3;
    tc.seed = 4;
    tc.adam.learning_rate = 1e-3;
    tc.dice.reduction = reduction;
    UNet<float> a(NetworkConfig::desk()), b(NetworkConfig::desk());
    init_he<float>(a.parameters(), 2);
    init_he<float>(b.parameters(), 2);
    const auto ha = train(a, data, tc);
    tc.jobs = 3;
    const auto hb = train(b, data, tc);
    CHECK(ha == hb);
    CHECK(values_of(a) == values_of(b));
    REQUIRE(ha.size() == 2);
    for (double d : ha) CHECK((d >= 0.0 && d <= 1.0));
  }
}

TEST_CASE("pooled Dice gradient matches the single-tensor loss") {
  // Two samples pushed through the batch path of soft_dice_loss.
  Tensor4<double> p(2, 1, 2, 2), g(2, 1, 2, 2);
  p.values = {0.2, 0.7, 0.4, 0.9, 0.1, 0.3, 0.5, 0.6};
  g.values = {0, 1, 0, 1, 0, 0, 1, 0};
  const auto r = soft_dice_loss(p, g, DiceLossConfig{1.0, DiceReduction::Batch});
  const double spg = 0.7 + 0.9 + 0.5, sp = 3.7, sg = 3.0;
  CHECK(r.dice == doctest::Approx((2 * spg + 1) / (sp + sg + 1)));
}

TEST_CASE("training on one phantom patch raises its soft Dice") {
  const auto r = test::overfit_single_patch(200, 0.95);
  CAPTURE(r.first_dice);
  CAPTURE(r.final_dice);
  CHECK(r.final_dice > r.first_dice + 0.1);
}

TEST_CASE("checkpoint round-trips every parameter") {
  NetworkConfig cfg = NetworkConfig::desk();
  cfg.seed = 9;
  UNet<float> net(cfg);
  init_he<float>(net.parameters(), 9);
  const auto bytes = checkpoint::encode(net);
  UNet<float> back = checkpoint::decode(bytes);
  CHECK(back.config().depth == cfg.depth);
  CHECK(back.config().base_filters == cfg.base_filters);
  CHECK(back.config().patch_size == cfg.patch_size);
  CHECK(back.config().seed == 9);
  CHECK(values_of(back) == values_of(net));

  const auto path = std::filesystem::temp_directory_path() / "xaug_test.ckpt";
  checkpoint::save(path, net);
  UNet<float> loaded = checkpoint::load(path);
  CHECK(values_of(loaded) == values_of(net));
  std::filesystem::remove(path);

  auto bad = bytes;
  bad[0] = 'Y';
  CHECK_THROWS_AS(checkpoint::decode(bad), Error);
  CHECK_THROWS_AS(checkpoint::decode(std::span(bytes).first(bytes.size() - 3)), Error);
}

TEST_CASE("prediction keeps the volume shape and is deterministic") {
  UNet<float> net(NetworkConfig::desk());
  init_he<float>(net.parameters(), 5);
  Volume3D vol(Dims3{40, 36, 2});
  SeedStream s(3);
  for (float& v : vol.data) v = static_cast<float>(s.unit_closed());
  const TilingConfig tiling{32, 16};
  const auto a = predict_volume(net, vol, tiling);
  const auto b = predict_volume(net, vol, tiling);
  CHECK(a.dims.nx == 40);
  CHECK(a.dims.ny == 36);
  CHECK(a.dims.nz == 2);
  CHECK(a.data == b.data);
  for (auto v : a.data) CHECK((v == 0 || v == 1));
}

TEST_CASE("all-zero network predicts a constant field") {
  UNet<float> net(NetworkConfig::desk());
  for (auto* p : net.parameters()) std::fill(p->value.begin(), p->value.end(), 0.0f);
  Volume3D vol(Dims3{32, 32, 1});
  std::fill(vol.data.begin(), vol.data.end(), 0.4f);
  const auto prob = predict_probabilities(net, vol, TilingConfig{32, 16});
  for (float v : prob.data) CHECK(v == 0.5f);
  // Threshold is strict: 0.5 is background.
  for (auto v : predict_volume(net, vol, TilingConfig{32, 16}).data) CHECK(v == 0);
}
