#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "loopsim/engine.hpp"
#include "loopsim/metrics.hpp"
#include "loopsim/trace_io.hpp"

namespace loopsim {

// Per-group series quantities tracked for equilibrium.
enum class SeriesMetric { kCount, kMeanTheta, kMeanMeasurementError, kMeanPredictionError };

std::string_view metric_name(SeriesMetric metric);

struct EquilibriumSpec {
  SeriesMetric metric;
  double tolerance;
};

// Tolerances used by the aggregate report: 10 users for counts, 0.02 for means.
const std::vector<EquilibriumSpec>& default_equilibrium_specs();
inline constexpr std::size_t kEquilibriumWindowSteps = 5000;

struct EquilibriumResult {
  SeriesMetric metric;
  std::string group;
  double tolerance = 0.0;
  std::size_t window_steps = 0;
  std::optional<std::uint64_t> step;  // absent when no plateau was found
};

struct AggregateCheckpoint {
  std::uint64_t step = 0;
  std::string group;
  StatFamily family = StatFamily::kTheta;
  std::size_t seeds = 0;
  double mean_count = 0.0;
  double mean = 0.0;    // seed average of the per-seed group mean
  double median = 0.0;  // seed average of the per-seed group median
};

struct FailedSeed {
  std::uint64_t seed = 0;
  std::string message;
};

struct AggregateReport {
  std::vector<std::uint64_t> seeds;  // seeds that completed
  std::vector<FailedSeed> failures;
  BiasAnnotation bias;
  std::vector<AggregateCheckpoint> checkpoints;
  std::vector<SeriesRow> mean_series;  // seed-averaged, same layout as series-csv
  std::vector<EquilibriumResult> equilibria;
};

// Seed average of per-seed series rows, matched by (step, group). All inputs
// must cover the same steps and groups.
std::vector<SeriesRow> average_series(const std::vector<std::vector<SeriesRow>>& per_seed);

// Pure fold over completed runs. Leaves `seeds`, `failures` and `bias` for the
// caller, which knows the configuration.
AggregateReport aggregate(const std::vector<std::vector<CheckpointRow>>& checkpoints,
                          const std::vector<std::vector<SeriesRow>>& series);

struct ExperimentResult {
  SimulationConfig config;
  std::vector<std::uint64_t> seeds;
  std::vector<std::optional<Trace>> traces;  // aligned with seeds; empty on failure
  AggregateReport report;
};

// One run per seed on up to `parallelism` worker threads. A failing seed is
// reported in report.failures and does not stop the others.
ExperimentResult run_experiment(const SimulationConfig& config,
                                const std::vector<std::uint64_t>& seeds,
                                std::size_t parallelism);

// Human-readable report.
std::string format_report(const AggregateReport& report);

}  // namespace loopsim
