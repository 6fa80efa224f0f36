#include "loopsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "loopsim/error.hpp"

namespace loopsim {

std::string_view family_name(StatFamily family) {
  switch (family) {
    case StatFamily::kTheta: return "theta";
    case StatFamily::kMeasurementError: return "x_minus_theta";
    case StatFamily::kPredictionErrorExpected: return "yhat_minus_expected_y";
    case StatFamily::kPredictionErrorTheta: return "yhat_minus_theta";
    case StatFamily::kPrediction: return "yhat";
  }
  return "unknown";
}

StatFamily family_from_name(std::string_view name) {
  for (auto f : kAllStatFamilies) {
    if (family_name(f) == name) return f;
  }
  throw UsageError("unknown statistic family '" + std::string(name) + "'");
}

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double mean_of(std::span<const double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double variance_of(std::span<const double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean_of(values);
  double s = 0.0;
  for (double v : values) s += (v - m) * (v - m);
  return s / static_cast<double>(values.size());
}

GroupStats compute_group_stats(GroupId group, std::vector<double> values) {
  GroupStats st;
  st.group = group;
  st.count = values.size();
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    st.mean = st.q1 = st.median = st.q3 = st.whisker_lo = st.whisker_hi = nan;
    return st;
  }
  st.mean = mean_of(values);
  std::sort(values.begin(), values.end());
  st.q1 = sorted_quantile(values, 0.25);
  st.median = sorted_quantile(values, 0.5);
  st.q3 = sorted_quantile(values, 0.75);
  const double iqr = st.q3 - st.q1;
  const double fence_lo = st.q1 - 1.5 * iqr;
  const double fence_hi = st.q3 + 1.5 * iqr;

  const auto first_in = std::lower_bound(values.begin(), values.end(), fence_lo);
  st.whisker_lo = (first_in == values.end() || *first_in > st.q1) ? st.q1 : *first_in;
  const auto past_in = std::upper_bound(values.begin(), values.end(), fence_hi);
  st.whisker_hi = (past_in == values.begin() || *(past_in - 1) < st.q3)
                      ? st.q3
                      : *(past_in - 1);
  for (double v : values) {
    if (v < st.whisker_lo || v > st.whisker_hi) st.outliers.push_back(v);
  }
  return st;
}

}  // namespace loopsim
