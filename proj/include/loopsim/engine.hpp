#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loopsim/feedback.hpp"
#include "loopsim/model.hpp"
#include "loopsim/population.hpp"
#include "loopsim/random.hpp"
#include "loopsim/stats.hpp"

namespace loopsim {

struct GroupConfig {
  std::string label;
  std::size_t size = 0;
  GroupParams params;
  // Outcome noise used only when labelling the initial training set.
  double mu_t_train = 0.0;
  double sigma_t_train = 0.0;

  friend bool operator==(const GroupConfig&, const GroupConfig&) = default;
};

enum class SelectionMode {
  kSingleUser,       // one uniformly chosen active user per step
  kWholePopulation,  // every slot in order, then one retrain check
};

struct SimulationConfig {
  std::vector<GroupConfig> groups;
  FeedbackConfig feedback;
  TrainConfig train;
  double threshold = 0.5;
  std::size_t total_steps = 50000;
  std::vector<std::size_t> checkpoints{0, 2000, 10000, 20000, 50000};
  std::uint64_t seed = 0;
  OutcomeNoise outcome_noise = OutcomeNoise::kTruncated;
  SelectionMode selection = SelectionMode::kSingleUser;
  std::size_t series_interval = 100;  // 0 disables the per-group series
  bool record_events = true;

  friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

// Throws ConfigError naming the first offending field.
void validate(const SimulationConfig& config);

std::vector<GroupParams> group_params(const SimulationConfig& config);

// The six named streams of one run. Each can be swapped for a scripted source.
struct RandomStreams {
  std::unique_ptr<RandomSource> population_init;
  std::unique_ptr<RandomSource> user_selection;
  std::unique_ptr<RandomSource> outcome;
  std::unique_ptr<RandomSource> feature_noise;
  std::unique_ptr<RandomSource> replacement;
  std::unique_ptr<RandomSource> training;

  static RandomStreams philox(std::uint64_t seed);
};

// State mutated by the feedback operators after an outcome is realized.
enum class FeedbackOperator { kIndividual, kFeature, kSampling };

struct EngineOptions {
  std::array<FeedbackOperator, 3> operator_order{
      FeedbackOperator::kIndividual, FeedbackOperator::kFeature,
      FeedbackOperator::kSampling};
};

struct EventRecord {
  std::uint64_t step = 0;  // 1-based index of the step that produced it
  std::uint64_t user_id = 0;
  GroupId group;
  double theta = 0.0;  // before feedback
  double x = 0.0;      // before feedback
  double y_hat = 0.0;
  int d = 0;
  double p = 0.0;
  int y = 0;
  std::uint64_t dataset_size = 0;  // after the gated append

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

struct RefitCheck {
  std::uint64_t step = 0;
  LogisticModel warm;
  LogisticModel cold;
};

struct SimulationState {
  std::uint64_t step = 0;
  Population population;
  LogisticModel model;
  Dataset dataset;
  RandomStreams streams;
  std::vector<RefitCheck> refit_checks;
  std::optional<EvalMetrics> last_eval;
};

// Synthetic labelled pairs for the initial fit, group by group.
Dataset build_initial_training_set(const SimulationConfig& config, RandomSource& rng);

// Population and initial model for step 0.
SimulationState initialize(const SimulationConfig& config, RandomStreams streams);

// Advances one step, appending the step's events to `events` when non-null.
void step(SimulationState& state, const SimulationConfig& config,
          std::vector<EventRecord>* events, const EngineOptions& options = {});

struct UserSnapshot {
  std::uint64_t id = 0;
  GroupId group;
  double theta = 0.0;
  double initial_theta = 0.0;
  double x = 0.0;
  double y_hat = 0.0;

  friend bool operator==(const UserSnapshot&, const UserSnapshot&) = default;
};

struct CheckpointRecord {
  std::uint64_t step = 0;
  LogisticModel model;
  std::vector<std::size_t> group_counts;
  std::vector<UserSnapshot> users;
  std::map<StatFamily, std::vector<GroupStats>> stats;  // one entry per group
  std::optional<EvalMetrics> eval;
};

// Per-group means sampled every series_interval steps.
struct SeriesPoint {
  std::uint64_t step = 0;
  std::vector<std::size_t> counts;
  std::vector<double> mean_theta;
  std::vector<double> mean_measurement_error;
  std::vector<double> mean_prediction_error;  // y_hat - theta
  std::vector<double> mean_y_hat;
};

struct Trace {
  std::vector<std::string> group_labels;
  std::vector<EventRecord> events;
  std::vector<CheckpointRecord> checkpoints;
  std::vector<SeriesPoint> series;
  std::vector<RefitCheck> refit_checks;

  // Throws UsageError if `step` was not checkpointed.
  const CheckpointRecord& checkpoint(std::uint64_t step) const;
};

// Error of one user's prediction for the family (or the raw value).
double family_value(StatFamily family, const UserSnapshot& user);

// Snapshot of the current state plus its per-group statistics.
CheckpointRecord make_checkpoint(const SimulationState& state, std::size_t group_count);

// Per-group statistics of a snapshot, recomputable from `users` alone.
std::map<StatFamily, std::vector<GroupStats>> checkpoint_stats(
    const std::vector<UserSnapshot>& users, std::size_t group_count);

SeriesPoint make_series_point(const SimulationState& state, std::size_t group_count);

Trace run(const SimulationConfig& config, const EngineOptions& options = {});
Trace run(const SimulationConfig& config, RandomStreams streams,
          const EngineOptions& options = {});

// Earliest index t such that every value in series[t .. t + window] lies within
// `tolerance` of series[t]. Requires window >= 2, tolerance > 0 and at least
// `window` samples.
std::optional<std::size_t> detect_equilibrium(std::span<const double> series,
                                              double tolerance, std::size_t window);

}  // namespace loopsim
