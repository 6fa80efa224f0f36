#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <initializer_list>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "loopsim/model.hpp"
#include "loopsim/random.hpp"

namespace loopsim::support {

// Hands out a fixed script of uniforms and normals; running dry is a test bug.
class ScriptedSource final : public RandomSource {
 public:
  ScriptedSource(std::initializer_list<double> uniforms = {},
                 std::initializer_list<double> normals = {})
      : uniforms_(uniforms), normals_(normals) {}

  double uniform() override {
    if (uniforms_.empty()) throw std::logic_error("scripted uniforms exhausted");
    const double u = uniforms_.front();
    uniforms_.pop_front();
    return u;
  }
  double normal() override {
    if (normals_.empty()) throw std::logic_error("scripted normals exhausted");
    const double z = normals_.front();
    normals_.pop_front();
    return z;
  }

  std::size_t remaining() const { return uniforms_.size() + normals_.size(); }

 private:
  std::deque<double> uniforms_;
  std::deque<double> normals_;
};

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// Composite Simpson rule with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int panels = 2000) {
  if (panels % 2 != 0) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// CDF of N(mu, sigma) truncated to [lo, hi], by quadrature of the density.
inline double truncated_normal_cdf(double v, double mu, double sigma, double lo,
                                   double hi) {
  auto density = [&](double t) { return normal_pdf((t - mu) / sigma) / sigma; };
  const double z = simpson(density, lo, hi, 400);
  if (v <= lo) return 0.0;
  if (v >= hi) return 1.0;
  return simpson(density, lo, v, 400) / z;
}

inline double truncated_normal_mean(double mu, double sigma, double lo, double hi) {
  auto density = [&](double t) { return normal_pdf((t - mu) / sigma) / sigma; };
  return simpson([&](double t) { return t * density(t); }, lo, hi) /
         simpson(density, lo, hi);
}

// One-sample Kolmogorov-Smirnov statistic sqrt(n) * D against `cdf`.
inline double ks_statistic(std::vector<double> sample,
                           const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return std::sqrt(n) * d;
}

// Asymptotic Kolmogorov critical value at significance 1e-3.
inline constexpr double kKsCritical001 = 1.9495;

// Mean log-loss plus ridge term, summed pair by pair.
inline double naive_loss(const LogisticModel& m, const Dataset& data, double l2) {
  double total = 0.0;
  for (const auto& p : data.pairs()) {
    const double yhat = 1.0 / (1.0 + std::exp(-(m.weight * p.x + m.bias)));
    total -= p.y == 1 ? std::log(yhat) : std::log1p(-yhat);
  }
  return total / static_cast<double>(data.size()) + 0.5 * l2 * m.weight * m.weight;
}

// Exhaustive grid over (weight, bias) followed by coordinate pattern search
// from the best grid node; independent of the library optimizer.
inline LogisticModel grid_search_fit(const Dataset& data, double l2) {
  LogisticModel best{0.0, 0.0};
  double best_loss = naive_loss(best, data, l2);
  for (double w = -20.0; w <= 20.0; w += 0.25) {
    for (double b = -20.0; b <= 20.0; b += 0.25) {
      const double l = naive_loss({w, b}, data, l2);
      if (l < best_loss) {
        best_loss = l;
        best = {w, b};
      }
    }
  }
  for (double h = 0.125; h > 1e-7; h *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (auto [dw, db] : {std::pair{h, 0.0}, {-h, 0.0}, {0.0, h}, {0.0, -h}}) {
        const LogisticModel c{best.weight + dw, best.bias + db};
        const double l = naive_loss(c, data, l2);
        if (l < best_loss) {
          best_loss = l;
          best = c;
          improved = true;
        }
      }
    }
  }
  return best;
}

}  // namespace loopsim::support
