#include "loopsim/presets.hpp"

#include "loopsim/error.hpp"

namespace loopsim {

SimulationConfig base_two_group_config() {
  SimulationConfig c;
  GroupParams g1;
  g1.mu_theta = 0.7;
  g1.sigma_theta = 0.15;
  g1.mu_r = 0.0;
  g1.sigma_r = 0.0;
  g1.mu_t = 0.0;
  g1.sigma_t = 0.1;
  g1.n_train = 500;
  GroupParams g2 = g1;
  g2.mu_theta = 0.3;
  // Group sizes match the realized split plotted at step 0.
  c.groups = {{"G1", 496, g1, 0.0, 0.0}, {"G2", 504, g2, 0.0, 0.0}};
  return c;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"sampling", "individual", "feature",
                                              "ml_model", "outcome",    "open_loop"};
  return names;
}

SimulationConfig preset(std::string_view name) {
  SimulationConfig c = base_two_group_config();
  auto& fb = c.feedback;
  if (name == "sampling") {
    fb.sampling_enabled = true;
  } else if (name == "individual") {
    fb.individual_enabled = true;
  } else if (name == "outcome") {
    fb.outcome_enabled = true;
  } else if (name == "ml_model") {
    fb.ml_model_enabled = true;
    for (auto& g : c.groups) g.sigma_t_train = 1.0;
  } else if (name == "feature") {
    fb.feature_enabled = true;
    for (auto& g : c.groups) {
      g.params.mu_theta = 0.5;
      g.params.sigma_r = 0.1;
    }
    c.groups[1].params.mu_r = -0.2;
  } else if (name == "open_loop") {
    // Every loop stays disabled.
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  return c;
}

}  // namespace loopsim
