#include "xaug/config_json.hpp"

#include <fstream>
#include <set>

namespace xaug {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* section) {
  if (!j.is_object()) fail(ErrorKind::InvalidConfig, std::string(section) + " must be a JSON object");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) fail(ErrorKind::InvalidConfig, "unknown field \"" + key + "\" in " + section);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void to_json(json& j, const Range& r) { j = json::array({r.lo, r.hi}); }
void from_json(const json& j, Range& r) {
  if (!j.is_array() || j.size() != 2) fail(ErrorKind::InvalidConfig, "ranges are [lo, hi] arrays");
  r = Range{j[0].get<double>(), j[1].get<double>()};
}

void to_json(json& j, const Dims3& d) { j = json::array({d.nx, d.ny, d.nz}); }
void from_json(const json& j, Dims3& d) {
  if (!j.is_array() || j.size() != 3) fail(ErrorKind::InvalidConfig, "dims are [nx, ny, nz] arrays");
  d = Dims3{j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

void to_json(json& j, const PhantomConfig& c) {
  j = json{{"dims", c.dims},
           {"n_discs", c.n_discs},
           {"semi_x", c.semi_x},
           {"semi_y", c.semi_y},
           {"semi_z", c.semi_z},
           {"gap", c.gap},
           {"center_x_jitter", c.center_x_jitter},
           {"center_z_jitter", c.center_z_jitter},
           {"disc_x_wobble", c.disc_x_wobble},
           {"background_mean", c.background_mean},
           {"foreground_mean", c.foreground_mean},
           {"noise_sigma", c.noise_sigma},
           {"gain", c.gain},
           {"seed", c.seed}};
}
void from_json(const json& j, PhantomConfig& c) {
  reject_unknown(j,
                 {"dims", "n_discs", "semi_x", "semi_y", "semi_z", "gap", "center_x_jitter", "center_z_jitter",
                  "disc_x_wobble", "background_mean", "foreground_mean", "noise_sigma", "gain", "seed"},
                 "phantom");
  read(j, "dims", c.dims);
  read(j, "n_discs", c.n_discs);
  read(j, "semi_x", c.semi_x);
  read(j, "semi_y", c.semi_y);
  read(j, "semi_z", c.semi_z);
  read(j, "gap", c.gap);
  read(j, "center_x_jitter", c.center_x_jitter);
  read(j, "center_z_jitter", c.center_z_jitter);
  read(j, "disc_x_wobble", c.disc_x_wobble);
  read(j, "background_mean", c.background_mean);
  read(j, "foreground_mean", c.foreground_mean);
  read(j, "noise_sigma", c.noise_sigma);
  read(j, "gain", c.gain);
  read(j, "seed", c.seed);
}

void to_json(json& j, const TilingConfig& c) { j = json{{"patch_size", c.patch_size}, {"stride", c.stride}}; }
void from_json(const json& j, TilingConfig& c) {
  reject_unknown(j, {"patch_size", "stride"}, "tiling");
  read(j, "patch_size", c.patch_size);
  read(j, "stride", c.stride);
}

void to_json(json& j, const NetworkConfig& c) {
  j = json{{"depth", c.depth}, {"base_filters", c.base_filters}, {"patch_size", c.patch_size}, {"seed", c.seed}};
}
void from_json(const json& j, NetworkConfig& c) {
  reject_unknown(j, {"depth", "base_filters", "patch_size", "seed"}, "network");
  read(j, "depth", c.depth);
  read(j, "base_filters", c.base_filters);
  read(j, "patch_size", c.patch_size);
  read(j, "seed", c.seed);
}

NLOHMANN_JSON_SERIALIZE_ENUM(DiceReduction, {{DiceReduction::Batch, "batch"}, {DiceReduction::PerSample, "per_sample"}})

void to_json(json& j, const OptimizerConfig& c) {
  j = json{{"learning_rate", c.adam.learning_rate},
           {"beta1", c.adam.beta1},
           {"beta2", c.adam.beta2},
           {"eps", c.adam.eps},
           {"batch_size", c.batch_size},
           {"dice_epsilon", c.dice_epsilon},
           {"dice_reduction", c.dice_reduction}};
}
void from_json(const json& j, OptimizerConfig& c) {
  reject_unknown(j, {"learning_rate", "beta1", "beta2", "eps", "batch_size", "dice_epsilon", "dice_reduction"},
                 "optimizer");
  read(j, "learning_rate", c.adam.learning_rate);
  read(j, "beta1", c.adam.beta1);
  read(j, "beta2", c.adam.beta2);
  read(j, "eps", c.adam.eps);
  read(j, "batch_size", c.batch_size);
  read(j, "dice_epsilon", c.dice_epsilon);
  if (j.contains("dice_reduction")) {
    const auto name = j.at("dice_reduction").get<std::string>();
    if (name != "batch" && name != "per_sample")
      fail(ErrorKind::InvalidConfig, "optimizer.dice_reduction must be \"batch\" or \"per_sample\"");
    c.dice_reduction = j.at("dice_reduction").get<DiceReduction>();
  }
}

void to_json(json& j, const AugmentConfig& c) {
  j = json{{"level", c.level},
           {"angle_range", c.angle_deg},
           {"scale_range", c.scale},
           {"translation_range", c.translation},
           {"seed", c.seed},
           {"include_original", c.include_original}};
}
void from_json(const json& j, AugmentConfig& c) {
  reject_unknown(j, {"level", "angle_range", "scale_range", "translation_range", "seed", "include_original"},
                 "augment");
  read(j, "level", c.level);
  read(j, "angle_range", c.angle_deg);
  read(j, "scale_range", c.scale);
  read(j, "translation_range", c.translation);
  read(j, "seed", c.seed);
  read(j, "include_original", c.include_original);
}

void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"training_sizes", c.training_sizes},
           {"aug_levels", c.aug_levels},
           {"epochs", c.epochs},
           {"validation_size", c.validation_size},
           {"phantom", c.phantom},
           {"tiling", c.tiling},
           {"network", c.network},
           {"optimizer", c.optimizer},
           {"augment", c.augment},
           {"master_seed", c.master_seed},
           {"output_dir", c.output_dir}};
}
void from_json(const json& j, ExperimentConfig& c) {
  reject_unknown(j,
                 {"training_sizes", "aug_levels", "epochs", "validation_size", "phantom", "tiling", "network",
                  "optimizer", "augment", "master_seed", "output_dir"},
                 "experiment");
  read(j, "training_sizes", c.training_sizes);
  read(j, "aug_levels", c.aug_levels);
  read(j, "epochs", c.epochs);
  read(j, "validation_size", c.validation_size);
  read(j, "phantom", c.phantom);
  read(j, "tiling", c.tiling);
  read(j, "network", c.network);
  read(j, "optimizer", c.optimizer);
  read(j, "augment", c.augment);
  read(j, "master_seed", c.master_seed);
  read(j, "output_dir", c.output_dir);
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::InvalidConfig, path.string() + ": " + e.what());
  }
}

}  // namespace xaug
