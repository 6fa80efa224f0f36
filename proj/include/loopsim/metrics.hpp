#pragma once

#include <cstdint>
#include <set>
#include <string_view>
#include <vector>

#include "loopsim/engine.hpp"
#include "loopsim/feedback.hpp"
#include "loopsim/model.hpp"
#include "loopsim/stats.hpp"

namespace loopsim {

enum class BiasKind { kRepresentation, kHistorical, kMeasurement };

// Flavours of representation bias. Only meaningful alongside kRepresentation.
enum class RepresentationNuance {
  kTargetVsUse,            // sampled population differs from the use population
  kUnderrepresentedGroup,  // a group is too small for the model to learn it
  kUnrepresentativeSample, // the sample is skewed within a group
};

std::string_view bias_name(BiasKind kind);
std::string_view nuance_name(RepresentationNuance nuance);

struct BiasAnnotation {
  std::set<BiasKind> kinds;
  std::set<RepresentationNuance> nuances;
  // Set when the ML-model loop runs with a held-out test split: the test set
  // is drawn from the same gated data, so evaluation itself is biased.
  bool evaluation_bias_advisory = false;

  friend bool operator==(const BiasAnnotation&, const BiasAnnotation&) = default;
};

// Union over enabled loops of
//   sampling, ML model -> representation
//   individual         -> historical
//   feature, outcome   -> measurement
BiasAnnotation bias_annotation(const FeedbackConfig& feedback, double test_fraction = 0.0);

// Throws InvariantError when the checkpoint's group counts do not sum to the
// number of recorded users.
double representation_share(const Trace& trace, GroupId group, std::uint64_t step);

std::vector<GroupStats> measurement_error_stats(const Trace& trace, std::uint64_t step);

enum class ErrorReference { kExpectedOutcome, kTheta };

std::vector<GroupStats> prediction_error_stats(const Trace& trace, std::uint64_t step,
                                               ErrorReference reference);

// Per-group statistics of `family` at `step`.
const std::vector<GroupStats>& checkpoint_family(const Trace& trace, std::uint64_t step,
                                                 StatFamily family);

}  // namespace loopsim
