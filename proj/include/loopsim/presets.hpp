#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "loopsim/engine.hpp"

namespace loopsim {

// Two-group recommender experiments: "sampling", "individual", "feature",
// "ml_model", "outcome", plus "open_loop" (sampling setup with every loop off).
SimulationConfig preset(std::string_view name);  // throws ConfigError

const std::vector<std::string>& preset_names();

// Parameters shared by every preset before the per-experiment overrides.
SimulationConfig base_two_group_config();

}  // namespace loopsim
