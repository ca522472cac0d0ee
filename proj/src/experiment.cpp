#include "xaug/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "binary_io.hpp"
#include "xaug/checkpoint.hpp"
#include "xaug/config_json.hpp"
#include "xaug/metrics.hpp"
#include "xaug/rng.hpp"

namespace xaug {
namespace {

constexpr std::uint64_t kPhantomStream = 0x50484e54ULL;
constexpr std::uint64_t kNetStream = 1, kAugmentStream = 2, kShuffleStream = 3;

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  detail::write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

const RunRecord* find_cell(const std::vector<RunRecord>& records, int size, int level) {
  for (const auto& r : records)
    if (r.training_size == size && r.aug_level == level) return &r;
  return nullptr;
}

}  // namespace

AugmentConfig ExperimentConfig::desk_augment() {
  AugmentConfig a;
  const double t = scaled_translation_limit(32);
  a.translation = Range{-t, t};
  return a;
}

ExperimentConfig ExperimentConfig::paper_grid() {
  ExperimentConfig c;
  c.training_sizes = {1, 3, 5, 7, 9};
  c.aug_levels = {5, 10, 20, 30, 40, 50};
  c.epochs = 100;
  c.validation_size = 40;
  return c;
}

void ExperimentConfig::validate() const {
  if (training_sizes.empty() || aug_levels.empty())
    fail(ErrorKind::InvalidConfig, "training_sizes and aug_levels must be non-empty");
  for (int s : training_sizes)
    if (s < 1) fail(ErrorKind::InvalidConfig, "training sizes must be >= 1");
  for (int l : aug_levels)
    if (l < 0) fail(ErrorKind::InvalidConfig, "augmentation levels must be >= 0");
  if (std::set<int>(training_sizes.begin(), training_sizes.end()).size() != training_sizes.size() ||
      std::set<int>(aug_levels.begin(), aug_levels.end()).size() != aug_levels.size())
    fail(ErrorKind::InvalidConfig, "grid axes must not repeat values");
  if (epochs < 0) fail(ErrorKind::InvalidConfig, "epochs must be >= 0");
  if (validation_size < 1) fail(ErrorKind::InvalidConfig, "validation_size must be >= 1");
  if (tiling.patch_size != network.patch_size)
    fail(ErrorKind::InvalidConfig, "tiling.patch_size must equal network.patch_size");
  if (optimizer.batch_size < 1) fail(ErrorKind::InvalidConfig, "batch_size must be >= 1");
  if (!(optimizer.dice_epsilon > 0.0)) fail(ErrorKind::InvalidConfig, "dice_epsilon must be positive");
  optimizer.adam.validate();
  network.validate();
  phantom.validate();
  validate_tiling(tiling, phantom.dims.nx, phantom.dims.ny);
  AugmentConfig probe = augment;
  probe.level = 1;
  probe.validate();
}

std::string RunRecord::cell_id() const {
  return "s" + std::to_string(training_size) + "_l" + std::to_string(aug_level);
}

Cohort make_cohort(const ExperimentConfig& cfg) {
  PhantomConfig pc = cfg.phantom;
  pc.seed = derive_seed(cfg.master_seed, kPhantomStream, cfg.phantom.seed);
  const int pool = *std::max_element(cfg.training_sizes.begin(), cfg.training_sizes.end());
  Cohort c;
  // Training pool indices [0, pool), validation [pool, pool + validation_size): disjoint by construction.
  for (int i = 0; i < pool; ++i) c.training.push_back(generate_phantom(pc, i));
  for (int i = 0; i < cfg.validation_size; ++i) c.validation.push_back(generate_phantom(pc, pool + i));
  return c;
}

std::uint64_t cell_seed(std::uint64_t master_seed, int training_size, int aug_level) {
  return derive_seed(master_seed, static_cast<std::uint64_t>(training_size), static_cast<std::uint64_t>(aug_level));
}

RunRecord run_cell(const ExperimentConfig& cfg, const Cohort& cohort, int training_size, int aug_level,
                   const std::filesystem::path& checkpoint) {
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.training_size = training_size;
  rec.aug_level = aug_level;
  rec.seed = cell_seed(cfg.master_seed, training_size, aug_level);

  if (training_size > static_cast<int>(cohort.training.size()))
    fail(ErrorKind::InvalidConfig, "training size exceeds the training pool");

  // Nested subsets: size k uses training volumes 0..k-1.
  std::vector<PatchRecord> patches;
  for (int v = 0; v < training_size; ++v) {
    auto p = extract_training_patches(cohort.training[v].image, cohort.training[v].mask, cfg.tiling, v);
    patches.insert(patches.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  }
  AugmentConfig aug = cfg.augment;
  aug.level = aug_level;
  aug.include_original = aug_level == 0 ? true : cfg.augment.include_original;
  aug.seed = derive_seed(rec.seed, kAugmentStream);
  const auto data = augment_dataset(pairs_of(patches), aug);

  NetworkConfig nc = cfg.network;
  nc.seed = derive_seed(rec.seed, kNetStream);
  UNet<float> net(nc);

  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.optimizer.batch_size;
  tc.seed = derive_seed(rec.seed, kShuffleStream);
  tc.adam = cfg.optimizer.adam;
  tc.dice = DiceLossConfig{cfg.optimizer.dice_epsilon, cfg.optimizer.dice_reduction};
  rec.train_dice = train(net, data, tc);
  rec.final_train_dice = rec.train_dice.empty() ? 0.0 : rec.train_dice.back();

  std::vector<MaskVolume> pred, truth;
  for (const auto& v : cohort.validation) {
    pred.push_back(predict_volume(net, v.image, cfg.tiling, 0.5));
    truth.push_back(v.mask);
  }
  rec.validation_dice = mean_dice(pred, truth);
  if (!checkpoint.empty()) checkpoint::save(checkpoint, net);
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::vector<RunRecord> run_grid(const ExperimentConfig& cfg, int jobs, const CellCallback& on_cell,
                                bool write_checkpoints) {
  cfg.validate();
  const Cohort cohort = make_cohort(cfg);
  std::vector<std::pair<int, int>> cells;
  for (int s : cfg.training_sizes)
    for (int l : cfg.aug_levels) cells.emplace_back(s, l);

  std::vector<RunRecord> records(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex report_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      const auto [size, level] = cells[k];
      RunRecord& rec = records[k];
      try {
        std::filesystem::path ckpt;
        if (write_checkpoints)
          ckpt = std::filesystem::path(cfg.output_dir) /
                 ("cell_s" + std::to_string(size) + "_l" + std::to_string(level) + ".ckpt");
        rec = run_cell(cfg, cohort, size, level, ckpt);
      } catch (const std::exception& e) {
        rec = RunRecord{};
        rec.training_size = size;
        rec.aug_level = level;
        rec.seed = cell_seed(cfg.master_seed, size, level);
        rec.failed = true;
        rec.error = e.what();
      }
      if (on_cell) {
        std::lock_guard lock(report_mutex);
        on_cell(rec);
      }
    }
  };
  const int n = std::clamp(jobs, 1, static_cast<int>(cells.size()));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (int t = 0; t < n; ++t) threads.emplace_back(worker);
  }
  return records;
}

std::string format_table(const std::vector<RunRecord>& records, const std::vector<int>& sizes,
                         const std::vector<int>& levels, bool validation) {
  if (records.empty() || sizes.empty() || levels.empty()) fail(ErrorKind::IncompleteGrid, "no records");
  std::string out = "augmentation_level";
  for (int s : sizes) out += "," + std::to_string(s);
  out += "\n";
  for (int l : levels) {
    out += std::to_string(l) + "x";
    for (int s : sizes) {
      const RunRecord* r = find_cell(records, s, l);
      if (!r)
        fail(ErrorKind::IncompleteGrid,
             "missing cell (size " + std::to_string(s) + ", level " + std::to_string(l) + ")");
      out += ",";
      out += r->failed ? "NA" : fixed3(validation ? r->validation_dice : r->final_train_dice);
    }
    out += "\n";
  }
  return out;
}

std::string format_curves(const std::vector<RunRecord>& records) {
  if (records.empty()) fail(ErrorKind::IncompleteGrid, "no records");
  std::string out = "cell,training_size,aug_level,epoch,split,dice\n";
  for (const auto& r : records) {
    if (r.failed) continue;
    const std::string prefix =
        r.cell_id() + "," + std::to_string(r.training_size) + "," + std::to_string(r.aug_level) + ",";
    for (std::size_t e = 0; e < r.train_dice.size(); ++e)
      out += prefix + std::to_string(e + 1) + ",train," + fixed6(r.train_dice[e]) + "\n";
    out += prefix + std::to_string(r.train_dice.size()) + ",validation," + fixed6(r.validation_dice) + "\n";
  }
  return out;
}

void emit_tables(const std::vector<RunRecord>& records, const std::vector<int>& sizes,
                 const std::vector<int>& levels, const std::filesystem::path& dir) {
  const std::string t1 = format_table(records, sizes, levels, false);
  const std::string t2 = format_table(records, sizes, levels, true);
  std::filesystem::create_directories(dir);
  write_text(dir / "table1_training.csv", t1);
  write_text(dir / "table2_validation.csv", t2);
}

void emit_curves(const std::vector<RunRecord>& records, const std::filesystem::path& dir) {
  const std::string text = format_curves(records);
  std::filesystem::create_directories(dir);
  write_text(dir / "curves.csv", text);
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, int jobs, const CellCallback& on_cell) {
  cfg.validate();
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  auto records = run_grid(cfg, jobs, on_cell, true);
  emit_tables(records, cfg.training_sizes, cfg.aug_levels, dir);
  emit_curves(records, dir);

  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : records)
    runs.push_back({{"cell", r.cell_id()},
                    {"training_size", r.training_size},
                    {"aug_level", r.aug_level},
                    {"seed", r.seed},
                    {"final_train_dice", r.final_train_dice},
                    {"validation_dice", r.validation_dice},
                    {"wall_seconds", r.wall_seconds},
                    {"failed", r.failed},
                    {"error", r.error}});
  nlohmann::json doc{{"config", cfg}, {"runs", runs}};
  write_text(dir / "runs.json", doc.dump(2) + "\n");
  return records;
}

}  // namespace xaug
