#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "loopsim/population.hpp"
#include "loopsim/random.hpp"

namespace loopsim {

enum class PairSource : std::uint8_t { kInitialTraining, kSimulation };

struct Provenance {
  PairSource source = PairSource::kSimulation;
  std::uint64_t step = 0;
  GroupId group;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct LabeledPair {
  double x = 0.0;
  int y = 0;
  Provenance provenance;

  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

// Append-only sample (X, Y). Alongside the ordered pairs it keeps per-feature
// label counts so that loss evaluation costs O(distinct x) rather than O(n):
// the log-loss of k identical pairs is k times the loss of one.
class Dataset {
 public:
  void append(const LabeledPair& pair);

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const std::vector<LabeledPair>& pairs() const { return pairs_; }

  // Distinct feature values in first-seen order with their label counts.
  const std::vector<double>& distinct_x() const { return xs_; }
  const std::vector<double>& positives() const { return pos_; }
  const std::vector<double>& negatives() const { return neg_; }

 private:
  std::vector<LabeledPair> pairs_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  std::vector<double> xs_;
  std::vector<double> pos_;
  std::vector<double> neg_;
};

struct LogisticModel {
  double weight = 0.0;
  double bias = 0.0;

  friend bool operator==(const LogisticModel&, const LogisticModel&) = default;
};

enum class Optimizer { kNewton, kGradientDescent };

struct TrainConfig {
  Optimizer optimizer = Optimizer::kNewton;
  // Initial step multiplier; halved whenever a step would raise the loss.
  double learning_rate = 1.0;
  std::size_t epochs_initial = 100;    // iterations for a cold fit
  std::size_t steps_per_retrain = 1;   // iterations for a warm-started refit
  double l2 = 1e-4;
  std::size_t retrain_cadence = 10;    // simulation steps between refits
  std::size_t cold_refit_interval = 1000;  // 0 disables the drift guard
  double test_fraction = 0.0;
  double gradient_tolerance = 1e-10;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void validate(const TrainConfig& config);

struct EvalMetrics {
  double log_loss = 0.0;
  double accuracy = 0.0;
  // Mean of (y_hat - y) per group index; NaN for groups absent from the test set.
  std::vector<double> group_mean_error;
};

struct LossGradient {
  double loss = 0.0;
  double d_weight = 0.0;
  double d_bias = 0.0;
};

double sigmoid(double z);

// 1 / (1 + exp(-(weight * x + bias))).
double predict(const LogisticModel& model, double x);

// 1 iff y_hat > threshold.
int decide(double y_hat, double threshold);

// Mean log-loss plus (l2 / 2) * weight^2, and its exact gradient.
LossGradient loss_and_gradient(const LogisticModel& model, const Dataset& data,
                               double l2);

double loss(const LogisticModel& model, const Dataset& data, double l2);

struct FitResult {
  LogisticModel model;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

// Descends from warm_start (or (0, 0)) for `iterations` accepted-or-rejected
// steps, stopping early once the gradient is below tolerance. Every accepted
// step lowers the loss; a rejected step halves the step size.
FitResult fit_detailed(const Dataset& data, const TrainConfig& config,
                       const std::optional<LogisticModel>& warm_start,
                       std::size_t iterations);

// Uses epochs_initial without a warm start, steps_per_retrain with one.
LogisticModel fit(const Dataset& data, const TrainConfig& config,
                  const std::optional<LogisticModel>& warm_start = std::nullopt);

// Disjoint partition: ceil(fraction * n) pairs to the test set, the rest to
// training; both keep the original pair order.
std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction,
                                  RandomSource& rng);

EvalMetrics evaluate(const LogisticModel& model, const Dataset& test,
                     std::size_t group_count);

}  // namespace loopsim
