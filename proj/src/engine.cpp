#include "loopsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "loopsim/error.hpp"

namespace loopsim {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

bool finite(double v) { return std::isfinite(v); }

// Fits on the training part of the dataset (all of it unless a test fraction
// is configured) and refreshes the held-out evaluation.
LogisticModel fit_model(SimulationState& state, const SimulationConfig& config,
                        const std::optional<LogisticModel>& warm_start) {
  const TrainConfig& tc = config.train;
  if (tc.test_fraction <= 0.0) return fit(state.dataset, tc, warm_start);
  auto [train, test] = split(state.dataset, tc.test_fraction, *state.streams.training);
  if (train.empty()) return warm_start.value_or(state.model);
  LogisticModel m = fit(train, tc, warm_start);
  state.last_eval = evaluate(m, test, config.groups.size());
  return m;
}

void retrain(SimulationState& state, const SimulationConfig& config, std::uint64_t s) {
  const TrainConfig& tc = config.train;
  const LogisticModel warm = fit_model(state, config, state.model);
  state.model = warm;
  if (tc.cold_refit_interval > 0 && s % tc.cold_refit_interval == 0) {
    const LogisticModel cold = fit_model(state, config, std::nullopt);
    state.refit_checks.push_back({s, warm, cold});
    state.model = cold;
  }
}

void interact(SimulationState& state, const SimulationConfig& config,
              const std::vector<GroupParams>& params, std::size_t slot,
              std::uint64_t s, std::vector<EventRecord>* events,
              const EngineOptions& options) {
  const FeedbackConfig& fb = config.feedback;
  RandomStreams& rng = state.streams;
  Individual& user = state.population.at(slot);
  const GroupParams& gp = params[user.group.index];

  const double y_hat = predict(state.model, user.x);
  const int d = decide(y_hat, config.threshold);
  double p = click_probability(user.theta, gp, config.outcome_noise, *rng.outcome);
  if (fb.outcome_enabled) p = shifted_click_probability(p, d, fb.delta);
  const int y = realize_outcome(p, *rng.outcome);
  gate_dataset_append(state.dataset,
                      {user.x, y, {PairSource::kSimulation, s, user.group}}, d,
                      fb.ml_model_enabled);
  if (d == 1) {
    ++user.recommended_count;
    if (y == 1) ++user.clicked_count;
  }
  if (events != nullptr) {
    events->push_back({s, user.id, user.group, user.theta, user.x, y_hat, d, p, y,
                       state.dataset.size()});
  }

  bool departed = false;
  for (FeedbackOperator op : options.operator_order) {
    if (departed) break;  // the slot now holds a newcomer
    switch (op) {
      case FeedbackOperator::kIndividual:
        if (fb.individual_enabled) {
          user.theta = apply_individual_feedback(user.theta, d, fb.alpha);
        }
        break;
      case FeedbackOperator::kFeature:
        if (!fb.feature_enabled) break;
        if (fb.feature_gate == FeatureGate::kRecommendedOnly && d != 1) break;
        if (fb.feature_update == FeatureUpdate::kMovingAverage) {
          user.x = apply_feature_feedback(user.x, y, fb.beta);
        } else if (user.recommended_count > 0) {
          user.x = static_cast<double>(user.clicked_count) /
                   static_cast<double>(user.recommended_count);
        }
        break;
      case FeedbackOperator::kSampling:
        if (fb.sampling_enabled) {
          apply_sampling_feedback(state.population, slot, d, params, *rng.replacement);
          departed = d == 0;
        }
        break;
    }
  }
}

}  // namespace

void validate(const SimulationConfig& c) {
  require(!c.groups.empty(), "groups must not be empty");
  std::size_t total = 0;
  std::size_t total_train = 0;
  for (std::size_t g = 0; g < c.groups.size(); ++g) {
    const auto& gc = c.groups[g];
    const std::string ctx = "groups[" + std::to_string(g) + "]";
    validate(gc.params, ctx);
    require(finite(gc.mu_t_train), ctx + ".mu_t_train must be finite");
    require(finite(gc.sigma_t_train) && gc.sigma_t_train >= 0.0,
            ctx + ".sigma_t_train must be finite and >= 0");
    total += gc.size;
    total_train += gc.params.n_train;
  }
  require(total > 0, "groups: total population size must be positive");
  require(total_train > 0, "groups: n_train must be positive for at least one group");
  require(finite(c.threshold) && c.threshold >= 0.0 && c.threshold <= 1.0,
          "threshold must lie in [0, 1]");
  require(c.total_steps >= 1, "total_steps must be >= 1");
  for (std::size_t i = 0; i < c.checkpoints.size(); ++i) {
    require(c.checkpoints[i] <= c.total_steps,
            "checkpoints[" + std::to_string(i) + "] exceeds total_steps");
    require(i == 0 || c.checkpoints[i - 1] < c.checkpoints[i],
            "checkpoints must be strictly increasing");
  }
  validate(c.feedback);
  validate(c.train);
}

std::vector<GroupParams> group_params(const SimulationConfig& config) {
  std::vector<GroupParams> out;
  out.reserve(config.groups.size());
  for (const auto& g : config.groups) out.push_back(g.params);
  return out;
}

RandomStreams RandomStreams::philox(std::uint64_t seed) {
  RandomStreams s;
  s.population_init = std::make_unique<PhiloxStream>(seed, StreamId::kPopulationInit);
  s.user_selection = std::make_unique<PhiloxStream>(seed, StreamId::kUserSelection);
  s.outcome = std::make_unique<PhiloxStream>(seed, StreamId::kOutcome);
  s.feature_noise = std::make_unique<PhiloxStream>(seed, StreamId::kFeatureNoise);
  s.replacement = std::make_unique<PhiloxStream>(seed, StreamId::kReplacement);
  s.training = std::make_unique<PhiloxStream>(seed, StreamId::kTraining);
  return s;
}

Dataset build_initial_training_set(const SimulationConfig& config, RandomSource& rng) {
  std::size_t total = 0;
  for (const auto& g : config.groups) total += g.params.n_train;
  if (total == 0) {
    throw ConfigError("groups: n_train must be positive for at least one group");
  }
  Dataset data;
  for (std::size_t g = 0; g < config.groups.size(); ++g) {
    const GroupConfig& gc = config.groups[g];
    const GroupParams& gp = gc.params;
    const GroupId gid{static_cast<std::uint32_t>(g)};
    for (std::size_t i = 0; i < gp.n_train; ++i) {
      const double theta =
          draw_truncated_normal(gp.mu_theta, gp.sigma_theta, 0.0, 1.0, rng);
      const double x = realize_feature(theta, gp, rng);
      const double p = noisy_probability(theta, gc.mu_t_train, gc.sigma_t_train,
                                         config.outcome_noise, rng);
      const int y = realize_outcome(p, rng);
      data.append({x, y, {PairSource::kInitialTraining, 0, gid}});
    }
  }
  return data;
}

SimulationState initialize(const SimulationConfig& config, RandomStreams streams) {
  validate(config);
  SimulationState state;
  state.streams = std::move(streams);
  std::vector<GroupSpec> specs;
  for (const auto& g : config.groups) specs.push_back({g.params, g.size});
  state.population = init_population(specs, *state.streams.population_init,
                                     *state.streams.feature_noise);
  state.dataset = build_initial_training_set(config, *state.streams.training);
  state.model = fit_model(state, config, std::nullopt);
  return state;
}

void step(SimulationState& state, const SimulationConfig& config,
          std::vector<EventRecord>* events, const EngineOptions& options) {
  if (state.step >= config.total_steps) {
    throw UsageError("step: run already reached total_steps");
  }
  const std::uint64_t s = state.step + 1;
  const auto params = group_params(config);
  if (config.selection == SelectionMode::kSingleUser) {
    const std::size_t slot =
        uniform_index(*state.streams.user_selection, state.population.size());
    interact(state, config, params, slot, s, events, options);
  } else {
    for (std::size_t slot = 0; slot < state.population.size(); ++slot) {
      interact(state, config, params, slot, s, events, options);
    }
  }
  if (s % config.train.retrain_cadence == 0) retrain(state, config, s);
  state.step = s;
}

double family_value(StatFamily family, const UserSnapshot& u) {
  switch (family) {
    case StatFamily::kTheta: return u.theta;
    case StatFamily::kMeasurementError: return u.x - u.theta;
    case StatFamily::kPredictionErrorExpected:
    case StatFamily::kPredictionErrorTheta: return u.y_hat - u.theta;
    case StatFamily::kPrediction: return u.y_hat;
  }
  return 0.0;
}

std::map<StatFamily, std::vector<GroupStats>> checkpoint_stats(
    const std::vector<UserSnapshot>& users, std::size_t group_count) {
  std::map<StatFamily, std::vector<GroupStats>> out;
  for (StatFamily f : kAllStatFamilies) {
    std::vector<std::vector<double>> per_group(group_count);
    for (const auto& u : users) per_group.at(u.group.index).push_back(family_value(f, u));
    auto& dst = out[f];
    for (std::size_t g = 0; g < group_count; ++g) {
      dst.push_back(compute_group_stats(GroupId{static_cast<std::uint32_t>(g)},
                                        std::move(per_group[g])));
    }
  }
  return out;
}

CheckpointRecord make_checkpoint(const SimulationState& state, std::size_t group_count) {
  CheckpointRecord cp;
  cp.step = state.step;
  cp.model = state.model;
  cp.group_counts = state.population.group_counts();
  cp.users.reserve(state.population.size());
  for (const auto& m : state.population.members()) {
    cp.users.push_back({m.id, m.group, m.theta, m.initial_theta, m.x,
                        predict(state.model, m.x)});
  }
  cp.stats = checkpoint_stats(cp.users, group_count);
  cp.eval = state.last_eval;
  return cp;
}

SeriesPoint make_series_point(const SimulationState& state, std::size_t group_count) {
  SeriesPoint sp;
  sp.step = state.step;
  sp.counts.assign(group_count, 0);
  sp.mean_theta.assign(group_count, 0.0);
  sp.mean_measurement_error.assign(group_count, 0.0);
  sp.mean_prediction_error.assign(group_count, 0.0);
  sp.mean_y_hat.assign(group_count, 0.0);
  for (const auto& m : state.population.members()) {
    const auto g = m.group.index;
    const double y_hat = predict(state.model, m.x);
    ++sp.counts[g];
    sp.mean_theta[g] += m.theta;
    sp.mean_measurement_error[g] += m.x - m.theta;
    sp.mean_prediction_error[g] += y_hat - m.theta;
    sp.mean_y_hat[g] += y_hat;
  }
  for (std::size_t g = 0; g < group_count; ++g) {
    const double n = static_cast<double>(sp.counts[g]);
    const double nan = std::nan("");
    sp.mean_theta[g] = n > 0 ? sp.mean_theta[g] / n : nan;
    sp.mean_measurement_error[g] = n > 0 ? sp.mean_measurement_error[g] / n : nan;
    sp.mean_prediction_error[g] = n > 0 ? sp.mean_prediction_error[g] / n : nan;
    sp.mean_y_hat[g] = n > 0 ? sp.mean_y_hat[g] / n : nan;
  }
  return sp;
}

const CheckpointRecord& Trace::checkpoint(std::uint64_t s) const {
  for (const auto& cp : checkpoints) {
    if (cp.step == s) return cp;
  }
  throw UsageError("no checkpoint recorded at step " + std::to_string(s));
}

Trace run(const SimulationConfig& config, const EngineOptions& options) {
  return run(config, RandomStreams::philox(config.seed), options);
}

Trace run(const SimulationConfig& config, RandomStreams streams,
          const EngineOptions& options) {
  SimulationState state = initialize(config, std::move(streams));
  const std::size_t groups = config.groups.size();
  Trace trace;
  for (const auto& g : config.groups) trace.group_labels.push_back(g.label);
  if (config.record_events) {
    const std::size_t per_step = config.selection == SelectionMode::kSingleUser
                                     ? 1
                                     : state.population.size();
    trace.events.reserve(config.total_steps * per_step);
  }
  std::vector<EventRecord>* events = config.record_events ? &trace.events : nullptr;

  std::size_t next_cp = 0;
  auto observe = [&] {
    if (config.series_interval > 0 && state.step % config.series_interval == 0) {
      trace.series.push_back(make_series_point(state, groups));
    }
    if (next_cp < config.checkpoints.size() && config.checkpoints[next_cp] == state.step) {
      trace.checkpoints.push_back(make_checkpoint(state, groups));
      ++next_cp;
    }
  };
  observe();
  while (state.step < config.total_steps) {
    step(state, config, events, options);
    observe();
  }
  trace.refit_checks = std::move(state.refit_checks);
  return trace;
}

std::optional<std::size_t> detect_equilibrium(std::span<const double> series,
                                              double tolerance, std::size_t window) {
  if (window < 2) throw UsageError("detect_equilibrium: window must be >= 2");
  if (!(tolerance > 0.0)) throw UsageError("detect_equilibrium: tolerance must be > 0");
  if (series.size() < window) {
    throw UsageError("detect_equilibrium: series shorter than window");
  }
  for (std::size_t t = 0; t + window < series.size(); ++t) {
    bool stable = true;
    for (std::size_t s = t + 1; s <= t + window && stable; ++s) {
      stable = std::abs(series[s] - series[t]) <= tolerance;
    }
    if (stable) return t;
  }
  return std::nullopt;
}

}  // namespace loopsim
