#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "loopsim/population.hpp"

namespace loopsim {

// Quantities summarized per group at every checkpoint.
enum class StatFamily {
  kTheta,                    // theta
  kMeasurementError,         // x - theta
  kPredictionErrorExpected,  // y_hat - E[y], with E[y] taken as theta
  kPredictionErrorTheta,     // y_hat - theta
  kPrediction,               // y_hat
};

inline constexpr StatFamily kAllStatFamilies[] = {
    StatFamily::kTheta, StatFamily::kMeasurementError,
    StatFamily::kPredictionErrorExpected, StatFamily::kPredictionErrorTheta,
    StatFamily::kPrediction};

std::string_view family_name(StatFamily family);
StatFamily family_from_name(std::string_view name);  // throws UsageError

// Tukey box-plot summary. Quartiles interpolate linearly between order
// statistics (position (n - 1) q); whiskers reach the most extreme samples
// within 1.5 IQR of the box; everything beyond them is an outlier.
struct GroupStats {
  GroupId group;
  std::size_t count = 0;
  double mean = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_lo = 0.0;
  double whisker_hi = 0.0;
  std::vector<double> outliers;
};

// Linear-interpolation quantile of already-sorted data.
double sorted_quantile(std::span<const double> sorted, double q);

// Summary of `values`; an empty input yields count 0 and NaN fields.
GroupStats compute_group_stats(GroupId group, std::vector<double> values);

double mean_of(std::span<const double> values);
double variance_of(std::span<const double> values);  // population variance

}  // namespace loopsim
