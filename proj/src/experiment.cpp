#include "loopsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>
#include <tuple>

#include "loopsim/error.hpp"

namespace loopsim {
namespace {

double metric_value(const SeriesRow& r, SeriesMetric m) {
  switch (m) {
    case SeriesMetric::kCount: return r.count;
    case SeriesMetric::kMeanTheta: return r.mean_theta;
    case SeriesMetric::kMeanMeasurementError: return r.mean_x_minus_theta;
    case SeriesMetric::kMeanPredictionError: return r.mean_yhat_minus_theta;
  }
  return 0.0;
}

std::vector<EquilibriumResult> find_equilibria(const std::vector<SeriesRow>& rows) {
  std::vector<std::string> groups;
  for (const auto& r : rows) {
    if (std::find(groups.begin(), groups.end(), r.group) == groups.end()) {
      groups.push_back(r.group);
    }
  }
  std::vector<EquilibriumResult> out;
  for (const auto& spec : default_equilibrium_specs()) {
    for (const auto& g : groups) {
      std::vector<std::uint64_t> steps;
      std::vector<double> values;
      for (const auto& r : rows) {
        if (r.group != g) continue;
        steps.push_back(r.step);
        values.push_back(metric_value(r, spec.metric));
      }
      EquilibriumResult res{spec.metric, g, spec.tolerance, kEquilibriumWindowSteps, {}};
      if (steps.size() >= 2) {
        const std::uint64_t interval = steps[1] - steps[0];
        const std::size_t window =
            interval == 0 ? 0 : static_cast<std::size_t>(kEquilibriumWindowSteps / interval);
        if (window >= 2 && values.size() >= window) {
          if (auto t = detect_equilibrium(values, spec.tolerance, window)) {
            res.step = steps[*t];
          }
        }
      }
      out.push_back(std::move(res));
    }
  }
  return out;
}

}  // namespace

std::string_view metric_name(SeriesMetric m) {
  switch (m) {
    case SeriesMetric::kCount: return "count";
    case SeriesMetric::kMeanTheta: return "mean_theta";
    case SeriesMetric::kMeanMeasurementError: return "mean_x_minus_theta";
    case SeriesMetric::kMeanPredictionError: return "mean_yhat_minus_theta";
  }
  return "unknown";
}

const std::vector<EquilibriumSpec>& default_equilibrium_specs() {
  static const std::vector<EquilibriumSpec> specs{
      {SeriesMetric::kCount, 10.0},
      {SeriesMetric::kMeanTheta, 0.02},
      {SeriesMetric::kMeanMeasurementError, 0.02},
      {SeriesMetric::kMeanPredictionError, 0.02},
  };
  return specs;
}

std::vector<SeriesRow> average_series(const std::vector<std::vector<SeriesRow>>& per_seed) {
  if (per_seed.empty()) return {};
  std::vector<SeriesRow> mean = per_seed.front();
  for (std::size_t s = 1; s < per_seed.size(); ++s) {
    const auto& rows = per_seed[s];
    if (rows.size() != mean.size()) {
      throw UsageError("average_series: seeds cover different series lengths");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].step != mean[i].step || rows[i].group != mean[i].group) {
        throw UsageError("average_series: series rows do not line up across seeds");
      }
      mean[i].count += rows[i].count;
      mean[i].mean_theta += rows[i].mean_theta;
      mean[i].mean_x_minus_theta += rows[i].mean_x_minus_theta;
      mean[i].mean_yhat_minus_theta += rows[i].mean_yhat_minus_theta;
      mean[i].mean_yhat += rows[i].mean_yhat;
    }
  }
  const double n = static_cast<double>(per_seed.size());
  for (auto& r : mean) {
    r.count /= n;
    r.mean_theta /= n;
    r.mean_x_minus_theta /= n;
    r.mean_yhat_minus_theta /= n;
    r.mean_yhat /= n;
  }
  return mean;
}

AggregateReport aggregate(const std::vector<std::vector<CheckpointRow>>& checkpoints,
                          const std::vector<std::vector<SeriesRow>>& series) {
  AggregateReport report;
  // Key order follows the first seed's rows.
  using Key = std::tuple<std::uint64_t, std::string, StatFamily>;
  std::vector<Key> order;
  std::map<Key, AggregateCheckpoint> acc;
  std::map<Key, std::size_t> populated;
  for (const auto& rows : checkpoints) {
    for (const auto& r : rows) {
      Key key{r.step, r.group, r.family};
      auto [it, inserted] = acc.try_emplace(key);
      if (inserted) {
        order.push_back(key);
        it->second.step = r.step;
        it->second.group = r.group;
        it->second.family = r.family;
      }
      auto& a = it->second;
      // Empty groups carry NaN statistics and do not enter the average.
      ++a.seeds;
      a.mean_count += static_cast<double>(r.count);
      if (r.count > 0) {
        a.mean += r.mean;
        a.median += r.median;
        ++populated[key];
      }
    }
  }
  for (const auto& key : order) {
    auto a = acc.at(key);
    const auto n = static_cast<double>(populated[key]);
    a.mean_count /= static_cast<double>(a.seeds);
    a.mean = n > 0 ? a.mean / n : std::nan("");
    a.median = n > 0 ? a.median / n : std::nan("");
    report.checkpoints.push_back(std::move(a));
  }
  report.mean_series = average_series(series);
  report.equilibria = find_equilibria(report.mean_series);
  return report;
}

ExperimentResult run_experiment(const SimulationConfig& config,
                                const std::vector<std::uint64_t>& seeds,
                                std::size_t parallelism) {
  validate(config);
  ExperimentResult result;
  result.config = config;
  result.seeds = seeds;
  result.traces.resize(seeds.size());
  std::vector<std::string> errors(seeds.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      SimulationConfig c = config;
      c.seed = seeds[i];
      try {
        result.traces[i] = run(c);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (parallelism == 0) parallelism = std::max(1u, std::thread::hardware_concurrency());
  parallelism = std::min(parallelism, std::max<std::size_t>(seeds.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < parallelism; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<std::vector<CheckpointRow>> cps;
  std::vector<std::vector<SeriesRow>> series;
  std::vector<std::uint64_t> completed;
  std::vector<FailedSeed> failures;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (result.traces[i]) {
      cps.push_back(checkpoint_rows(*result.traces[i]));
      series.push_back(series_rows(*result.traces[i]));
      completed.push_back(seeds[i]);
    } else {
      failures.push_back({seeds[i], errors[i]});
    }
  }
  result.report = aggregate(cps, series);
  result.report.seeds = std::move(completed);
  result.report.failures = std::move(failures);
  result.report.bias = bias_annotation(config.feedback, config.train.test_fraction);
  return result;
}

std::string format_report(const AggregateReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << "seeds completed: " << r.seeds.size() << '\n';
  for (const auto& f : r.failures) os << "seed " << f.seed << " failed: " << f.message << '\n';

  os << "bias annotation:";
  if (r.bias.kinds.empty()) os << " none";
  for (auto k : r.bias.kinds) os << ' ' << bias_name(k);
  if (!r.bias.nuances.empty()) {
    os << " (representation:";
    for (auto n : r.bias.nuances) os << ' ' << nuance_name(n);
    os << ')';
  }
  if (r.bias.evaluation_bias_advisory) os << " [evaluation bias advisory]";
  os << '\n';

  os << "\nseed-averaged checkpoint statistics\n";
  os << "step\tgroup\tfamily\tcount\tmean\tmedian\n";
  for (const auto& a : r.checkpoints) {
    os << a.step << '\t' << a.group << '\t' << family_name(a.family) << '\t'
       << a.mean_count << '\t' << a.mean << '\t' << a.median << '\n';
  }

  os << "\nequilibrium (window " << kEquilibriumWindowSteps << " steps)\n";
  for (const auto& e : r.equilibria) {
    os << metric_name(e.metric) << '\t' << e.group << "\ttol " << e.tolerance << '\t';
    if (e.step) {
      os << "step " << *e.step;
    } else {
      os << "not reached";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace loopsim
