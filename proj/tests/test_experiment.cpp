#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "xaug/config_json.hpp"
#include "xaug/error.hpp"
#include "xaug/experiment.hpp"

using namespace xaug;

namespace {

RunRecord record(int size, int level, int epochs, double base) {
  RunRecord r;
  r.training_size = size;
  r.aug_level = level;
  for (int e = 0; e < epochs; ++e) r.train_dice.push_back(base + 0.001 * e);
  r.final_train_dice = r.train_dice.empty() ? 0.0 : r.train_dice.back();
  r.validation_dice = base / 2;
  return r;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Small grid that trains in well under a second per cell.
ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.training_sizes = {1, 2};
  c.aug_levels = {0, 2};
  c.epochs = 1;
  c.validation_size = 2;
  c.phantom.dims = {32, 32, 5};
  c.phantom.n_discs = 2;
  c.phantom.semi_x = {5, 8};
  c.phantom.center_x_jitter = 3;
  c.phantom.center_z_jitter = 0.5;
  c.phantom.semi_z = {1.2, 1.5};
  return c;
}

}  // namespace

TEST_CASE("tables put levels in rows and sizes in columns") {
  const std::vector<int> sizes{1, 3}, levels{5, 50};
  std::vector<RunRecord> recs;
  for (int s : sizes)
    for (int l : levels) recs.push_back(record(s, l, 3, 0.1 * s + 0.001 * l));
  const auto t1 = lines_of(format_table(recs, sizes, levels, false));
  REQUIRE(t1.size() == 3);
  CHECK(t1[0] == "augmentation_level,1,3");
  CHECK(t1[1] == "5x,0.107,0.307");
  CHECK(t1[2] == "50x,0.152,0.352");
  const auto t2 = lines_of(format_table(recs, sizes, levels, true));
  CHECK(t2[1] == "5x,0.053,0.153");
}

TEST_CASE("missing cells and empty records are rejected") {
  std::vector<RunRecord> recs{record(1, 5, 1, 0.5)};
  CHECK_THROWS_AS(format_table(recs, {1, 3}, {5}, false), Error);
  CHECK_THROWS_AS(format_table({}, {1}, {5}, false), Error);
  CHECK_THROWS_AS(format_curves({}), Error);
}

TEST_CASE("failed cells print NA") {
  auto r = record(1, 5, 1, 0.5);
  r.failed = true;
  CHECK(lines_of(format_table({r}, {1}, {5}, true))[1] == "5x,NA");
}

TEST_CASE("curves have one row per epoch plus a validation row") {
  const auto lines = lines_of(format_curves({record(1, 5, 100, 0.2)}));
  REQUIRE(lines.size() == 1 + 101);
  CHECK(lines[0] == "cell,training_size,aug_level,epoch,split,dice");
  CHECK(lines[1] == "s1_l5,1,5,1,train,0.200000");
  CHECK(lines[100] == "s1_l5,1,5,100,train,0.299000");
  CHECK(lines[101] == "s1_l5,1,5,100,validation,0.100000");
}

TEST_CASE("paper grid has 30 cells in the published order") {
  const auto c = ExperimentConfig::paper_grid();
  CHECK(c.training_sizes == std::vector<int>{1, 3, 5, 7, 9});
  CHECK(c.aug_levels == std::vector<int>{5, 10, 20, 30, 40, 50});
  CHECK(c.epochs == 100);
  CHECK(c.validation_size == 40);
}

TEST_CASE("cohort splits are disjoint and deterministic") {
  const auto cfg = tiny_config();
  const Cohort a = make_cohort(cfg), b = make_cohort(cfg);
  REQUIRE(a.training.size() == 2);
  REQUIRE(a.validation.size() == 2);
  CHECK(a.training[0].image.data == b.training[0].image.data);
  for (const auto& t : a.training)
    for (const auto& v : a.validation) CHECK(t.image.data != v.image.data);
  auto other = cfg;
  other.master_seed = 1;
  CHECK(make_cohort(other).training[0].mask.data != a.training[0].mask.data);
}

TEST_CASE("config validation") {
  auto c = tiny_config();
  c.training_sizes.clear();
  CHECK_THROWS_AS(c.validate(), Error);
  c = tiny_config();
  c.tiling.patch_size = 16;
  CHECK_THROWS_AS(c.validate(), Error);
  c = tiny_config();
  c.aug_levels = {5, 5};
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_NOTHROW(ExperimentConfig{}.validate());
}

TEST_CASE("config JSON round-trips and rejects unknown keys") {
  auto c = tiny_config();
  c.optimizer.adam.learning_rate = 3e-4;
  c.optimizer.dice_reduction = DiceReduction::PerSample;
  c.augment.angle_deg = {-10, 15};
  const nlohmann::json j = c;
  const auto back = j.get<ExperimentConfig>();
  CHECK(nlohmann::json(back) == j);
  CHECK(back.optimizer.dice_reduction == DiceReduction::PerSample);
  CHECK(back.augment.angle_deg.hi == 15.0);

  auto bad = j;
  bad["learning_rate"] = 1.0;
  CHECK_THROWS_AS(bad.get<ExperimentConfig>(), Error);
  bad = j;
  bad["optimizer"]["dice_reduction"] = "mean";
  CHECK_THROWS_AS(bad.get<ExperimentConfig>(), Error);
  // Missing fields keep their defaults.
  const auto partial = nlohmann::json{{"epochs", 7}}.get<ExperimentConfig>();
  CHECK(partial.epochs == 7);
  CHECK(partial.aug_levels == ExperimentConfig{}.aug_levels);
}

TEST_CASE("tiny grid runs every cell and writes all outputs") {
  auto cfg = tiny_config();
  cfg.output_dir = (std::filesystem::temp_directory_path() / "xaug_exp_test").string();
  std::filesystem::remove_all(cfg.output_dir);
  int seen = 0;
  const auto recs = run_experiment(cfg, 2, [&](const RunRecord&) { ++seen; });
  CHECK(seen == 4);
  REQUIRE(recs.size() == 4);
  for (const auto& r : recs) {
    CHECK_FALSE(r.failed);
    CHECK(r.train_dice.size() == 1);
    CHECK((r.validation_dice >= 0.0 && r.validation_dice <= 1.0));
  }
  CHECK(recs[1].cell_id() == "s1_l2");
  const std::filesystem::path dir(cfg.output_dir);
  for (const char* f : {"table1_training.csv", "table2_validation.csv", "curves.csv", "runs.json",
                        "cell_s1_l0.ckpt", "cell_s2_l2.ckpt"})
    CHECK(std::filesystem::exists(dir / f));
  std::filesystem::remove_all(dir);
}
