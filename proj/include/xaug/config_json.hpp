#pragma once

#include <filesystem>

#include <json.hpp>

#include "xaug/experiment.hpp"

namespace xaug {

// JSON field names mirror the C++ member names. Missing fields keep their
// defaults; unknown fields are rejected.
void to_json(nlohmann::json& j, const Range& r);
void from_json(const nlohmann::json& j, Range& r);
void to_json(nlohmann::json& j, const Dims3& d);
void from_json(const nlohmann::json& j, Dims3& d);
void to_json(nlohmann::json& j, const PhantomConfig& c);
void from_json(const nlohmann::json& j, PhantomConfig& c);
void to_json(nlohmann::json& j, const TilingConfig& c);
void from_json(const nlohmann::json& j, TilingConfig& c);
void to_json(nlohmann::json& j, const NetworkConfig& c);
void from_json(const nlohmann::json& j, NetworkConfig& c);
void to_json(nlohmann::json& j, const OptimizerConfig& c);
void from_json(const nlohmann::json& j, OptimizerConfig& c);
void to_json(nlohmann::json& j, const AugmentConfig& c);
void from_json(const nlohmann::json& j, AugmentConfig& c);
void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace xaug
