#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "xaug/augment.hpp"
#include "xaug/layers.hpp"
#include "xaug/patching.hpp"
#include "xaug/phantom.hpp"
#include "xaug/train.hpp"
#include "xaug/unet.hpp"

namespace xaug {

struct OptimizerConfig {
  AdamConfig adam;
  int batch_size = 8;
  double dice_epsilon = 1.0;
  DiceReduction dice_reduction = DiceReduction::Batch;
};

/// The training-size x augmentation-level grid. Defaults are the desk-scale
/// grid on phantom data; paper_grid() gives the full 5 x 6 layout.
struct ExperimentConfig {
  std::vector<int> training_sizes{1, 3};
  std::vector<int> aug_levels{0, 5, 50};
  int epochs = 3;
  int validation_size = 10;
  PhantomConfig phantom;
  TilingConfig tiling{32, 16};
  NetworkConfig network = NetworkConfig::desk();
  OptimizerConfig optimizer;
  AugmentConfig augment = desk_augment();
  std::uint64_t master_seed = 0;
  std::string output_dir = "results";

  static AugmentConfig desk_augment();
  static ExperimentConfig paper_grid();
  void validate() const;
};

struct RunRecord {
  int training_size = 0;
  int aug_level = 0;
  std::vector<double> train_dice;  // one entry per epoch
  double final_train_dice = 0.0;
  double validation_dice = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;

  std::string cell_id() const;
};

/// Phantom volumes shared by all cells: the training pool and the held-out cohort.
struct Cohort {
  std::vector<PhantomVolume> training;
  std::vector<PhantomVolume> validation;
};

Cohort make_cohort(const ExperimentConfig& cfg);

std::uint64_t cell_seed(std::uint64_t master_seed, int training_size, int aug_level);

/// Trains and evaluates one grid cell. When `checkpoint` is non-empty the
/// trained network is written there.
RunRecord run_cell(const ExperimentConfig& cfg, const Cohort& cohort, int training_size, int aug_level,
                   const std::filesystem::path& checkpoint = {});

using CellCallback = std::function<void(const RunRecord&)>;

/// Runs every cell (sizes outer, levels inner), `jobs` cells at a time.
/// Failed cells are recorded, not thrown. Records come back in grid order.
std::vector<RunRecord> run_grid(const ExperimentConfig& cfg, int jobs = 1, const CellCallback& on_cell = {},
                                bool write_checkpoints = false);

/// Rows are augmentation levels, columns training sizes, 3 decimals.
std::string format_table(const std::vector<RunRecord>& records, const std::vector<int>& sizes,
                         const std::vector<int>& levels, bool validation);
/// Long format: cell,training_size,aug_level,epoch,split,dice.
std::string format_curves(const std::vector<RunRecord>& records);

/// Writes table1_training.csv and table2_validation.csv.
void emit_tables(const std::vector<RunRecord>& records, const std::vector<int>& sizes,
                 const std::vector<int>& levels, const std::filesystem::path& dir);
/// Writes curves.csv.
void emit_curves(const std::vector<RunRecord>& records, const std::filesystem::path& dir);

/// Full pipeline: grid, checkpoints, tables, curves, runs.json.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, int jobs = 1, const CellCallback& on_cell = {});

}  // namespace xaug
