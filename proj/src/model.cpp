#include "loopsim/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "loopsim/error.hpp"

namespace loopsim {
namespace {

// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

struct Curvature {
  double loss, gw, gb, hww, hwb, hbb;
};

// Loss, gradient and Hessian in one pass over the distinct feature values.
Curvature evaluate_curvature(const LogisticModel& m, const Dataset& data, double l2) {
  const auto& xs = data.distinct_x();
  const auto& pos = data.positives();
  const auto& neg = data.negatives();
  double loss = 0, gw = 0, gb = 0, hww = 0, hwb = 0, hbb = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const double z = m.weight * x + m.bias;
    // One exponential serves both softplus(z) and sigmoid(z).
    const double e = std::exp(-std::abs(z));
    const double sp = std::max(z, 0.0) + std::log1p(e);
    const double p = z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
    // y = 1 costs softplus(-z) = softplus(z) - z, y = 0 costs softplus(z).
    loss += pos[i] * (sp - z) + neg[i] * sp;
    const double w = pos[i] + neg[i];
    const double r = w * p - pos[i];
    const double h = w * p * (1.0 - p);
    gw += r * x;
    gb += r;
    hww += h * x * x;
    hwb += h * x;
    hbb += h;
  }
  const double n = static_cast<double>(data.size());
  return {loss / n + 0.5 * l2 * m.weight * m.weight,
          gw / n + l2 * m.weight,
          gb / n,
          hww / n + l2,
          hwb / n,
          hbb / n};
}

void require_finite_loss(double value, const LogisticModel& m) {
  if (!std::isfinite(value) || !std::isfinite(m.weight) || !std::isfinite(m.bias)) {
    std::ostringstream os;
    os << "training diverged: loss=" << value << " at weight=" << m.weight
       << " bias=" << m.bias;
    throw TrainingError(os.str());
  }
}

}  // namespace

void Dataset::append(const LabeledPair& pair) {
  if (!(pair.x >= 0.0 && pair.x <= 1.0)) {
    throw InvariantError("Dataset::append: x outside [0,1]");
  }
  if (pair.y != 0 && pair.y != 1) {
    throw InvariantError("Dataset::append: y must be 0 or 1");
  }
  pairs_.push_back(pair);
  // +0.0 and -0.0 compare equal but differ in bits; fold them together.
  const double key_value = pair.x == 0.0 ? 0.0 : pair.x;
  const auto key = std::bit_cast<std::uint64_t>(key_value);
  auto [it, inserted] = index_.try_emplace(key, xs_.size());
  if (inserted) {
    xs_.push_back(key_value);
    pos_.push_back(0.0);
    neg_.push_back(0.0);
  }
  (pair.y == 1 ? pos_ : neg_)[it->second] += 1.0;
}

void validate(const TrainConfig& c) {
  if (!std::isfinite(c.learning_rate) || c.learning_rate <= 0.0) {
    throw ConfigError("train.learning_rate must be finite and > 0");
  }
  if (!std::isfinite(c.l2) || c.l2 < 0.0) {
    throw ConfigError("train.l2 must be finite and >= 0");
  }
  if (c.retrain_cadence < 1) throw ConfigError("train.retrain_cadence must be >= 1");
  if (!(c.test_fraction >= 0.0 && c.test_fraction < 1.0)) {
    throw ConfigError("train.test_fraction must lie in [0, 1)");
  }
  if (!std::isfinite(c.gradient_tolerance) || c.gradient_tolerance < 0.0) {
    throw ConfigError("train.gradient_tolerance must be finite and >= 0");
  }
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double predict(const LogisticModel& model, double x) {
  return sigmoid(model.weight * x + model.bias);
}

int decide(double y_hat, double threshold) { return y_hat > threshold ? 1 : 0; }

LossGradient loss_and_gradient(const LogisticModel& model, const Dataset& data,
                               double l2) {
  if (data.empty()) throw UsageError("loss_and_gradient: empty dataset");
  const auto c = evaluate_curvature(model, data, l2);
  return {c.loss, c.gw, c.gb};
}

double loss(const LogisticModel& model, const Dataset& data, double l2) {
  if (data.empty()) throw UsageError("loss: empty dataset");
  const auto& xs = data.distinct_x();
  const auto& pos = data.positives();
  const auto& neg = data.negatives();
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double z = model.weight * xs[i] + model.bias;
    const double sp = softplus(z);
    total += pos[i] * (sp - z) + neg[i] * sp;
  }
  return total / static_cast<double>(data.size()) +
         0.5 * l2 * model.weight * model.weight;
}

FitResult fit_detailed(const Dataset& data, const TrainConfig& config,
                       const std::optional<LogisticModel>& warm_start,
                       std::size_t iterations) {
  if (data.empty()) throw UsageError("fit: empty dataset");
  FitResult result;
  LogisticModel m = warm_start.value_or(LogisticModel{});
  auto cur = evaluate_curvature(m, data, config.l2);
  require_finite_loss(cur.loss, m);
  result.initial_loss = cur.loss;
  double rate = config.learning_rate;

  for (std::size_t it = 0; it < iterations; ++it) {
    if (std::max(std::abs(cur.gw), std::abs(cur.gb)) <= config.gradient_tolerance) {
      break;
    }
    double dw = cur.gw;
    double db = cur.gb;
    if (config.optimizer == Optimizer::kNewton) {
      const double det = cur.hww * cur.hbb - cur.hwb * cur.hwb;
      if (det > 0.0 && std::isfinite(det)) {
        dw = (cur.hbb * cur.gw - cur.hwb * cur.gb) / det;
        db = (cur.hww * cur.gb - cur.hwb * cur.gw) / det;
      }
    }
    const LogisticModel candidate{m.weight - rate * dw, m.bias - rate * db};
    const auto next = evaluate_curvature(candidate, data, config.l2);
    if (std::isfinite(next.loss) && next.loss <= cur.loss) {
      m = candidate;
      cur = next;
      ++result.accepted_steps;
      if (config.optimizer == Optimizer::kNewton) rate = config.learning_rate;
    } else {
      rate *= 0.5;
      ++result.rejected_steps;
      if (rate < 1e-12) break;
    }
  }
  require_finite_loss(cur.loss, m);
  result.model = m;
  result.final_loss = cur.loss;
  return result;
}

LogisticModel fit(const Dataset& data, const TrainConfig& config,
                  const std::optional<LogisticModel>& warm_start) {
  const std::size_t iterations =
      warm_start ? config.steps_per_retrain : config.epochs_initial;
  return fit_detailed(data, config, warm_start, iterations).model;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction,
                                  RandomSource& rng) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw UsageError("split: test_fraction must lie in [0, 1)");
  }
  const std::size_t n = data.size();
  const auto test_count =
      static_cast<std::size_t>(std::ceil(test_fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first test_count slots become the test set.
  for (std::size_t i = 0; i < test_count; ++i) {
    const std::size_t j = i + uniform_index(rng, n - i);
    std::swap(order[i], order[j]);
  }
  std::vector<bool> in_test(n, false);
  for (std::size_t i = 0; i < test_count; ++i) in_test[order[i]] = true;

  Dataset train, test;
  for (std::size_t i = 0; i < n; ++i) {
    (in_test[i] ? test : train).append(data.pairs()[i]);
  }
  return {std::move(train), std::move(test)};
}

EvalMetrics evaluate(const LogisticModel& model, const Dataset& test,
                     std::size_t group_count) {
  if (test.empty()) throw UsageError("evaluate: empty test set");
  EvalMetrics out;
  std::vector<double> err_sum(group_count, 0.0);
  std::vector<std::size_t> err_n(group_count, 0);
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (const auto& pair : test.pairs()) {
    const double z = model.weight * pair.x + model.bias;
    const double sp = softplus(z);
    loss_sum += pair.y == 1 ? sp - z : sp;
    const double y_hat = sigmoid(z);
    if (decide(y_hat, 0.5) == pair.y) ++correct;
    const auto g = pair.provenance.group.index;
    if (g < group_count) {
      err_sum[g] += y_hat - pair.y;
      ++err_n[g];
    }
  }
  const double n = static_cast<double>(test.size());
  out.log_loss = loss_sum / n;
  out.accuracy = static_cast<double>(correct) / n;
  out.group_mean_error.resize(group_count);
  for (std::size_t g = 0; g < group_count; ++g) {
    out.group_mean_error[g] = err_n[g] == 0
                                  ? std::numeric_limits<double>::quiet_NaN()
                                  : err_sum[g] / static_cast<double>(err_n[g]);
  }
  return out;
}

}  // namespace loopsim
