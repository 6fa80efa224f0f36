#include "loopsim/metrics.hpp"

#include <numeric>
#include <string>

#include "loopsim/error.hpp"

namespace loopsim {

std::string_view bias_name(BiasKind kind) {
  switch (kind) {
    case BiasKind::kRepresentation: return "representation";
    case BiasKind::kHistorical: return "historical";
    case BiasKind::kMeasurement: return "measurement";
  }
  return "unknown";
}

std::string_view nuance_name(RepresentationNuance nuance) {
  switch (nuance) {
    case RepresentationNuance::kTargetVsUse: return "target-vs-use";
    case RepresentationNuance::kUnderrepresentedGroup: return "underrepresented-group";
    case RepresentationNuance::kUnrepresentativeSample: return "unrepresentative-sample";
  }
  return "unknown";
}

BiasAnnotation bias_annotation(const FeedbackConfig& fb, double test_fraction) {
  BiasAnnotation a;
  if (fb.sampling_enabled) {
    a.kinds.insert(BiasKind::kRepresentation);
    a.nuances.insert(RepresentationNuance::kUnderrepresentedGroup);
    a.nuances.insert(RepresentationNuance::kUnrepresentativeSample);
  }
  if (fb.ml_model_enabled) {
    a.kinds.insert(BiasKind::kRepresentation);
    a.nuances.insert(RepresentationNuance::kUnderrepresentedGroup);
    a.nuances.insert(RepresentationNuance::kUnrepresentativeSample);
    a.evaluation_bias_advisory = test_fraction > 0.0;
  }
  if (fb.individual_enabled) a.kinds.insert(BiasKind::kHistorical);
  if (fb.feature_enabled || fb.outcome_enabled) a.kinds.insert(BiasKind::kMeasurement);
  return a;
}

double representation_share(const Trace& trace, GroupId group, std::uint64_t step) {
  const CheckpointRecord& cp = trace.checkpoint(step);
  if (group.index >= cp.group_counts.size()) {
    throw UsageError("representation_share: unknown group " + std::to_string(group.index));
  }
  const std::size_t total =
      std::accumulate(cp.group_counts.begin(), cp.group_counts.end(), std::size_t{0});
  if (total != cp.users.size() || total == 0) {
    throw InvariantError("representation_share: group counts sum to " +
                         std::to_string(total) + " but " +
                         std::to_string(cp.users.size()) + " users are recorded");
  }
  return static_cast<double>(cp.group_counts[group.index]) / static_cast<double>(total);
}

const std::vector<GroupStats>& checkpoint_family(const Trace& trace, std::uint64_t step,
                                                 StatFamily family) {
  const CheckpointRecord& cp = trace.checkpoint(step);
  const auto it = cp.stats.find(family);
  if (it == cp.stats.end()) {
    throw UsageError("checkpoint at step " + std::to_string(step) + " has no '" +
                     std::string(family_name(family)) + "' statistics");
  }
  return it->second;
}

std::vector<GroupStats> measurement_error_stats(const Trace& trace, std::uint64_t step) {
  return checkpoint_family(trace, step, StatFamily::kMeasurementError);
}

std::vector<GroupStats> prediction_error_stats(const Trace& trace, std::uint64_t step,
                                               ErrorReference reference) {
  return checkpoint_family(trace, step,
                           reference == ErrorReference::kExpectedOutcome
                               ? StatFamily::kPredictionErrorExpected
                               : StatFamily::kPredictionErrorTheta);
}

}  // namespace loopsim
