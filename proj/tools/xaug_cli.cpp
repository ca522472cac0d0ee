// Command-line front end for the augmentation/segmentation pipeline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "xaug/augment.hpp"
#include "xaug/checkpoint.hpp"
#include "xaug/config_json.hpp"
#include "xaug/experiment.hpp"
#include "xaug/metrics.hpp"
#include "xaug/nifti.hpp"
#include "xaug/patch_io.hpp"
#include "xaug/phantom.hpp"
#include "xaug/preprocess.hpp"
#include "xaug/train.hpp"

namespace fs = std::filesystem;
using namespace xaug;

namespace {

struct SynthArgs {
  std::string config, out;
  int count = 1;
  int start = 0;
};

void run_synth(const SynthArgs& a) {
  PhantomConfig cfg;
  if (!a.config.empty()) cfg = load_json(a.config).get<PhantomConfig>();
  fs::create_directories(a.out);
  char name[64];
  for (int i = a.start; i < a.start + a.count; ++i) {
    const auto ph = generate_phantom(cfg, i);
    std::snprintf(name, sizeof name, "phantom_%03d", i);
    nifti::save(fs::path(a.out) / (std::string(name) + "_image.nii"), ph.image);
    nifti::save(fs::path(a.out) / (std::string(name) + "_mask.nii"), ph.mask);
  }
}

struct PreprocessArgs {
  std::string in, out;
  int target = 256;
  bool percentile_clip = false;
};

void run_preprocess(const PreprocessArgs& a) {
  IntensityMatchOptions opts;
  opts.percentile_clip = a.percentile_clip;
  nifti::save(a.out, intensity_match(resample_axial(nifti::load(a.in), a.target, a.target), opts));
}

struct PatchifyArgs {
  std::string image, mask, out;
  int patch = 128, stride = 64, volume_id = 0;
};

void run_patchify(const PatchifyArgs& a) {
  const auto records = extract_training_patches(nifti::load(a.image), nifti::load_mask(a.mask),
                                                TilingConfig{a.patch, a.stride}, a.volume_id);
  patch_io::save(a.out, records);
  std::cout << records.size() << " patches\n";
}

struct AugmentArgs {
  std::string in, out;
  int level = 5;
  std::uint64_t seed = 0;
  bool no_original = false;
  double max_angle = 20.0, scale_min = 0.8, scale_max = 1.2;
  double max_translation = -1.0;  // < 0: scaled to the patch size
  int jobs = 1;
};

void run_augment(const AugmentArgs& a) {
  const auto records = patch_io::load(a.in);
  const int p = records.empty() ? 128 : records.front().pair.image.width;
  AugmentConfig cfg;
  cfg.level = a.level;
  cfg.seed = a.seed;
  cfg.include_original = !a.no_original;
  cfg.angle_deg = Range{-a.max_angle, a.max_angle};
  cfg.scale = Range{a.scale_min, a.scale_max};
  const double t = a.max_translation >= 0.0 ? a.max_translation : scaled_translation_limit(p);
  cfg.translation = Range{-t, t};
  const auto augmented = augment_dataset(pairs_of(records), cfg, a.jobs);

  // Copies keep the provenance of their source patch.
  std::vector<PatchRecord> out;
  out.reserve(augmented.size());
  const std::size_t base = cfg.include_original ? records.size() : 0;
  for (std::size_t k = 0; k < augmented.size(); ++k) {
    const auto& src = k < base ? records[k] : records[(k - base) / static_cast<std::size_t>(cfg.level)];
    out.push_back(PatchRecord{augmented[k], src.volume_id, src.slice_index, src.x0, src.y0});
  }
  patch_io::save(a.out, out);
  std::cout << out.size() << " patches\n";
}

struct TrainArgs {
  std::string data, net_config, out, history;
  int epochs = 100;
  int jobs = 1;
};

void run_train(const TrainArgs& a) {
  const auto records = patch_io::load(a.data);
  if (records.empty()) fail(ErrorKind::EmptyDataset, a.data + " holds no patches");
  const int p = records.front().pair.image.width;

  NetworkConfig net_cfg;
  net_cfg.patch_size = p;
  OptimizerConfig opt;
  std::uint64_t shuffle_seed = 0;
  if (!a.net_config.empty()) {
    const auto j = load_json(a.net_config);
    for (const auto& [key, _] : j.items())
      if (key != "network" && key != "optimizer" && key != "shuffle_seed")
        fail(ErrorKind::InvalidConfig, "unknown field \"" + key + "\" in net config");
    if (j.contains("network")) {
      if (!j["network"].contains("patch_size")) {
        auto nj = j["network"];
        nj["patch_size"] = p;
        net_cfg = nj.get<NetworkConfig>();
      } else {
        net_cfg = j["network"].get<NetworkConfig>();
      }
    }
    if (j.contains("optimizer")) opt = j["optimizer"].get<OptimizerConfig>();
    if (j.contains("shuffle_seed")) shuffle_seed = j["shuffle_seed"].get<std::uint64_t>();
  }
  if (net_cfg.patch_size != p)
    fail(ErrorKind::BadSpatialSize, "network patch_size differs from the patch set (" + std::to_string(p) + ")");

  UNet<float> net(net_cfg);
  TrainConfig tc;
  tc.epochs = a.epochs;
  tc.batch_size = opt.batch_size;
  tc.adam = opt.adam;
  tc.dice = DiceLossConfig{opt.dice_epsilon, opt.dice_reduction};
  tc.seed = shuffle_seed;
  tc.jobs = a.jobs;

  std::ofstream hist;
  if (!a.history.empty()) {
    hist.open(a.history, std::ios::trunc);
    if (!hist) fail(ErrorKind::Io, "cannot open " + a.history);
    hist << "epoch,dice,loss\n";
  }
  train(net, pairs_of(records), tc, [&](const EpochStats& s) {
    char line[96];
    std::snprintf(line, sizeof line, "%d,%.6f,%.6f\n", s.epoch, s.mean_dice, s.mean_loss);
    if (hist) hist << line << std::flush;
    std::cerr << "epoch " << s.epoch << " dice " << s.mean_dice << "\n";
  });
  checkpoint::save(a.out, net);
}

struct PredictArgs {
  std::string model, image, out;
  int stride = 0;  // 0: half the patch size
  double threshold = 0.5;
};

void run_predict(const PredictArgs& a) {
  auto net = checkpoint::load(a.model);
  const int p = net.config().patch_size;
  const TilingConfig tiling{p, a.stride > 0 ? a.stride : std::max(1, p / 2)};
  nifti::save(a.out, predict_volume(net, nifti::load(a.image), tiling, a.threshold));
}

struct EvaluateArgs {
  std::string pred, truth;
};

void run_evaluate(const EvaluateArgs& a) {
  std::printf("%.3f\n", dice_score(nifti::load_mask(a.pred), nifti::load_mask(a.truth)));
}

struct ExperimentArgs {
  std::string config, out;
  int jobs = 1;
};

void run_experiment_cmd(const ExperimentArgs& a) {
  ExperimentConfig cfg;
  if (!a.config.empty()) cfg = load_json(a.config).get<ExperimentConfig>();
  if (!a.out.empty()) cfg.output_dir = a.out;
  const auto records = run_experiment(cfg, a.jobs, [](const RunRecord& r) {
    if (r.failed)
      std::cerr << r.cell_id() << " failed: " << r.error << "\n";
    else
      std::cerr << r.cell_id() << " train " << r.final_train_dice << " validation " << r.validation_dice << " ("
                << r.wall_seconds << " s)\n";
  });
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.failed;
  std::cout << records.size() << " cells, " << failed << " failed; results in " << cfg.output_dir << "\n";
  if (failed) fail(ErrorKind::IncompleteGrid, std::to_string(failed) + " cells failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extreme-augmentation segmentation pipeline"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate phantom volume/mask NIfTI pairs");
  c_synth->add_option("--config", synth.config, "Phantom config JSON");
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_option("--count", synth.count, "Number of volumes")->check(CLI::PositiveNumber);
  c_synth->add_option("--start", synth.start, "First volume index")->check(CLI::NonNegativeNumber);

  PreprocessArgs pre;
  auto* c_pre = app.add_subcommand("preprocess", "Resample axial slices and intensity-match to [0,1]");
  c_pre->add_option("--in", pre.in)->required();
  c_pre->add_option("--out", pre.out)->required();
  c_pre->add_option("--target", pre.target, "In-plane size")->check(CLI::Range(2, 32767));
  c_pre->add_flag("--percentile-clip", pre.percentile_clip, "Clip to 0.5/99.5 percentiles first");

  PatchifyArgs pat;
  auto* c_pat = app.add_subcommand("patchify", "Tile image and mask slices into a patch set");
  c_pat->add_option("--image", pat.image)->required();
  c_pat->add_option("--mask", pat.mask)->required();
  c_pat->add_option("--patch", pat.patch)->check(CLI::PositiveNumber);
  c_pat->add_option("--stride", pat.stride)->check(CLI::PositiveNumber);
  c_pat->add_option("--volume-id", pat.volume_id);
  c_pat->add_option("--out", pat.out)->required();

  AugmentArgs aug;
  auto* c_aug = app.add_subcommand("augment", "Add N random affine copies of every patch");
  c_aug->add_option("--in", aug.in)->required();
  c_aug->add_option("--out", aug.out)->required();
  c_aug->add_option("--level", aug.level, "Copies per patch")->check(CLI::NonNegativeNumber);
  c_aug->add_option("--seed", aug.seed);
  c_aug->add_flag("--no-original", aug.no_original, "Drop the unaugmented originals");
  c_aug->add_option("--max-angle", aug.max_angle, "Degrees");
  c_aug->add_option("--scale-min", aug.scale_min);
  c_aug->add_option("--scale-max", aug.scale_max);
  c_aug->add_option("--max-translation", aug.max_translation, "Pixels (default: 50 px scaled to the patch size)");
  c_aug->add_option("--jobs", aug.jobs)->check(CLI::PositiveNumber);

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train the residual U-Net on a patch set");
  c_train->add_option("--data", tr.data)->required();
  c_train->add_option("--net-config", tr.net_config, "JSON with network / optimizer / shuffle_seed");
  c_train->add_option("--epochs", tr.epochs)->check(CLI::NonNegativeNumber);
  c_train->add_option("--out", tr.out)->required();
  c_train->add_option("--history", tr.history, "Per-epoch CSV");
  c_train->add_option("--jobs", tr.jobs)->check(CLI::PositiveNumber);

  PredictArgs pr;
  auto* c_pred = app.add_subcommand("predict", "Segment a preprocessed volume");
  c_pred->add_option("--model", pr.model)->required();
  c_pred->add_option("--image", pr.image)->required();
  c_pred->add_option("--out", pr.out)->required();
  c_pred->add_option("--stride", pr.stride, "Tiling stride (default: half the patch size)");
  c_pred->add_option("--threshold", pr.threshold);

  EvaluateArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "Print the Dice score of two masks");
  c_eval->add_option("--pred", ev.pred)->required();
  c_eval->add_option("--truth", ev.truth)->required();

  ExperimentArgs ex;
  auto* c_exp = app.add_subcommand("experiment", "Run the training-size x augmentation-level grid");
  c_exp->add_option("--config", ex.config, "Experiment config JSON");
  c_exp->add_option("--out", ex.out, "Output directory (overrides output_dir)");
  c_exp->add_option("--jobs", ex.jobs, "Cells trained concurrently")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_synth->parsed()) run_synth(synth);
    else if (c_pre->parsed()) run_preprocess(pre);
    else if (c_pat->parsed()) run_patchify(pat);
    else if (c_aug->parsed()) run_augment(aug);
    else if (c_train->parsed()) run_train(tr);
    else if (c_pred->parsed()) run_predict(pr);
    else if (c_eval->parsed()) run_evaluate(ev);
    else if (c_exp->parsed()) run_experiment_cmd(ex);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
