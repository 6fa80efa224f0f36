#pragma once

#include <vector>

#include "loopsim/model.hpp"
#include "loopsim/population.hpp"
#include "loopsim/random.hpp"

namespace loopsim {

// When the observed feature x is refreshed after an interaction.
enum class FeatureGate {
  kRecommendedOnly,     // only after d = 1
  kEveryInteraction,    // after every interaction of the selected user
};

// How the refreshed feature is computed.
enum class FeatureUpdate {
  kMovingAverage,   // x <- (1 - beta) x + beta y
  kLifetimeRatio,   // x <- clicked_count / recommended_count
};

struct FeedbackConfig {
  bool sampling_enabled = false;

  bool individual_enabled = false;
  double alpha = 0.05;

  bool feature_enabled = false;
  double beta = 0.05;
  FeatureGate feature_gate = FeatureGate::kEveryInteraction;
  FeatureUpdate feature_update = FeatureUpdate::kMovingAverage;

  bool ml_model_enabled = false;

  bool outcome_enabled = false;
  double delta = 0.2;

  friend bool operator==(const FeedbackConfig&, const FeedbackConfig&) = default;
};

void validate(const FeedbackConfig& config);

// Sampling loop. On d = 0 the individual in `slot` leaves and a newcomer takes
// the slot; the newcomer's group is G1 with probability n_G1 / n (in general,
// group g with probability n_g / n), counted before the departure.
void apply_sampling_feedback(Population& pop, std::size_t slot, int d,
                             const std::vector<GroupParams>& groups,
                             RandomSource& replacement_rng);

// Individual loop: theta' = (1 - alpha) theta + alpha d.
double apply_individual_feedback(double theta, int d, double alpha);

// Feature loop, moving-average form: x' = (1 - beta) x + beta y.
double apply_feature_feedback(double x, int y, double beta);

// ML-model loop: with the gate on, pairs of negatively-decided individuals
// are never observed.
void gate_dataset_append(Dataset& dataset, const LabeledPair& pair, int d,
                         bool ml_model_enabled);

// Outcome loop: clamp(p + delta (2d - 1), 0, 1).
double shifted_click_probability(double p, int d, double delta);

}  // namespace loopsim
