#include "loopsim/feedback.hpp"

#include <algorithm>
#include <cmath>

#include "loopsim/error.hpp"

namespace loopsim {

void validate(const FeedbackConfig& c) {
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) {
    throw ConfigError("feedback.alpha must lie in (0, 1]");
  }
  if (!(c.beta > 0.0 && c.beta <= 1.0)) {
    throw ConfigError("feedback.beta must lie in (0, 1]");
  }
  if (!(c.delta >= 0.0 && c.delta <= 1.0)) {
    throw ConfigError("feedback.delta must lie in [0, 1]");
  }
}

void apply_sampling_feedback(Population& pop, std::size_t slot, int d,
                             const std::vector<GroupParams>& groups,
                             RandomSource& replacement_rng) {
  if (d == 1) return;
  if (groups.size() != pop.group_counts().size()) {
    throw UsageError("apply_sampling_feedback: group parameter count mismatch");
  }
  // Inverse-CDF draw over the current group shares.
  const double n = static_cast<double>(pop.size());
  const double u = replacement_rng.uniform() * n;
  std::uint32_t chosen = 0;
  double cumulative = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    cumulative += static_cast<double>(pop.group_counts()[g]);
    chosen = static_cast<std::uint32_t>(g);
    if (u < cumulative) break;
  }
  const GroupId gid{chosen};
  pop.replace(slot, make_individual(pop.next_id(), gid, groups[chosen],
                                    replacement_rng, replacement_rng));
}

double apply_individual_feedback(double theta, int d, double alpha) {
  return std::clamp((1.0 - alpha) * theta + alpha * static_cast<double>(d), 0.0, 1.0);
}

double apply_feature_feedback(double x, int y, double beta) {
  return std::clamp((1.0 - beta) * x + beta * static_cast<double>(y), 0.0, 1.0);
}

void gate_dataset_append(Dataset& dataset, const LabeledPair& pair, int d,
                         bool ml_model_enabled) {
  if (ml_model_enabled && d == 0) return;
  dataset.append(pair);
}

double shifted_click_probability(double p, int d, double delta) {
  return std::clamp(p + delta * (2.0 * d - 1.0), 0.0, 1.0);
}

}  // namespace loopsim
