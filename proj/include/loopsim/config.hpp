#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "loopsim/engine.hpp"

namespace loopsim {

// JSON form of a SimulationConfig. Every field is optional; a top-level
// "preset" key picks the starting point (otherwise library defaults), and the
// remaining keys override it. Unknown keys and mistyped values are rejected
// with ConfigError naming the JSON path, e.g. "groups[1].sigma_t".
SimulationConfig config_from_json(const nlohmann::json& json);
nlohmann::json config_to_json(const SimulationConfig& config);

SimulationConfig load_config(const std::filesystem::path& path);
void save_config(const SimulationConfig& config, const std::filesystem::path& path);

std::string_view to_string(OutcomeNoise noise);
std::string_view to_string(SelectionMode mode);
std::string_view to_string(FeatureGate gate);
std::string_view to_string(FeatureUpdate update);
std::string_view to_string(Optimizer optimizer);

}  // namespace loopsim
