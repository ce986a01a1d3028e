#pragma once

#include <filesystem>

#include <json.hpp>

#include "subdiff/diffusion.hpp"

namespace subdiff {

/// {"name": {"shape": [r, c], "data": [...column-major...]}, ...}
nlohmann::json params_to_json(const ParamSet& params);
ParamSet params_from_json(const nlohmann::json& j);

nlohmann::json histograms_to_json(const Histograms& h);
Histograms histograms_from_json(const nlohmann::json& j);

nlohmann::json train_config_to_json(const TrainConfig& c);
/// Unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const DiffusionModel& m);
DiffusionModel model_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const DiffusionModel& m);
DiffusionModel load_model(const std::filesystem::path& path);

/// Throws std::invalid_argument naming the first key of `j` not in `allowed`.
void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where);

}  // namespace subdiff
