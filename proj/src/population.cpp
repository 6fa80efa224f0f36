#include "loopsim/population.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "loopsim/error.hpp"

namespace loopsim {
namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw ConfigError(std::string(what) + " must be finite");
  }
}

}  // namespace

void validate(const GroupParams& p, const std::string& context) {
  auto check = [&](double v, const char* field, bool non_negative) {
    if (!std::isfinite(v)) {
      throw ConfigError(context + "." + field + " must be finite");
    }
    if (non_negative && v < 0.0) {
      throw ConfigError(context + "." + field + " must be >= 0");
    }
  };
  check(p.mu_theta, "mu_theta", false);
  check(p.sigma_theta, "sigma_theta", true);
  check(p.mu_r, "mu_r", false);
  check(p.sigma_r, "sigma_r", true);
  check(p.mu_t, "mu_t", false);
  check(p.sigma_t, "sigma_t", true);
}

bool operator==(const Individual& a, const Individual& b) {
  return a.id == b.id && a.group == b.group && a.theta == b.theta &&
         a.initial_theta == b.initial_theta && a.x == b.x &&
         a.recommended_count == b.recommended_count &&
         a.clicked_count == b.clicked_count;
}

bool operator==(const Population& a, const Population& b) {
  return a.members_ == b.members_ && a.group_counts_ == b.group_counts_;
}

void Population::add(Individual individual) {
  if (individual.group.index >= group_counts_.size()) {
    throw UsageError("Population::add: unknown group");
  }
  ++group_counts_[individual.group.index];
  members_.push_back(individual);
}

void Population::replace(std::size_t slot, Individual individual) {
  if (individual.group.index >= group_counts_.size()) {
    throw UsageError("Population::replace: unknown group");
  }
  Individual& old = members_.at(slot);
  --group_counts_[old.group.index];
  ++group_counts_[individual.group.index];
  old = individual;
}

void Population::check_invariants() const {
  std::vector<std::size_t> recount(group_counts_.size(), 0);
  for (const auto& m : members_) {
    if (m.group.index >= recount.size()) {
      throw InvariantError("individual with unknown group");
    }
    ++recount[m.group.index];
    if (!(m.theta >= 0.0 && m.theta <= 1.0) || !(m.x >= 0.0 && m.x <= 1.0)) {
      std::ostringstream os;
      os << "individual " << m.id << " left [0,1]: theta=" << m.theta
         << " x=" << m.x;
      throw InvariantError(os.str());
    }
    if (m.clicked_count > m.recommended_count) {
      throw InvariantError("clicked_count exceeds recommended_count");
    }
  }
  if (recount != group_counts_) {
    throw InvariantError("group_counts disagree with members");
  }
}

double draw_truncated_normal(double mu, double sigma, double lo, double hi,
                             RandomSource& rng) {
  require_finite(mu, "truncated normal mean");
  require_finite(sigma, "truncated normal sigma");
  if (!(lo < hi)) throw UsageError("draw_truncated_normal: lo must be < hi");
  if (sigma < 0.0) throw ConfigError("truncated normal sigma must be >= 0");
  if (sigma == 0.0) return std::clamp(mu, lo, hi);
  for (int attempt = 0; attempt < kMaxTruncationAttempts; ++attempt) {
    const double v = mu + sigma * rng.normal();
    if (v >= lo && v <= hi) return v;
  }
  std::ostringstream os;
  os << "truncated normal N(" << mu << ", " << sigma << ") on [" << lo << ", "
     << hi << "] rejected " << kMaxTruncationAttempts << " draws";
  throw ConfigError(os.str());
}

double realize_feature(double theta, const GroupParams& params, RandomSource& rng) {
  require_finite(theta, "theta");
  const double eps =
      params.sigma_r > 0.0 ? params.mu_r + params.sigma_r * rng.normal() : params.mu_r;
  return std::clamp(theta + eps, 0.0, 1.0);
}

double noisy_probability(double theta, double mu, double sigma,
                         OutcomeNoise noise, RandomSource& rng) {
  require_finite(theta, "theta");
  if (sigma == 0.0) return std::clamp(theta + mu, 0.0, 1.0);
  if (noise == OutcomeNoise::kTruncated) {
    return draw_truncated_normal(theta + mu, sigma, 0.0, 1.0, rng);
  }
  return std::clamp(theta + mu + sigma * rng.normal(), 0.0, 1.0);
}

double click_probability(double theta, const GroupParams& params,
                         OutcomeNoise noise, RandomSource& rng) {
  return noisy_probability(theta, params.mu_t, params.sigma_t, noise, rng);
}

int realize_outcome(double p, RandomSource& rng) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvariantError("realize_outcome: probability outside [0,1]");
  }
  return bernoulli(rng, p) ? 1 : 0;
}

Individual make_individual(std::uint64_t id, GroupId g, const GroupParams& params,
                           RandomSource& theta_rng, RandomSource& feature_rng) {
  Individual ind;
  ind.id = id;
  ind.group = g;
  ind.theta = draw_truncated_normal(params.mu_theta, params.sigma_theta, 0.0, 1.0,
                                    theta_rng);
  ind.initial_theta = ind.theta;
  ind.x = realize_feature(ind.theta, params, feature_rng);
  return ind;
}

Population init_population(const std::vector<GroupSpec>& groups,
                           RandomSource& theta_rng, RandomSource& feature_rng) {
  if (groups.empty()) throw ConfigError("at least one group is required");
  std::size_t total = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    validate(groups[g].params, "groups[" + std::to_string(g) + "]");
    total += groups[g].size;
  }
  if (total == 0) throw ConfigError("population size must be positive");

  Population pop(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const GroupId gid{static_cast<std::uint32_t>(g)};
    for (std::size_t i = 0; i < groups[g].size; ++i) {
      pop.add(make_individual(pop.next_id(), gid, groups[g].params, theta_rng,
                              feature_rng));
    }
  }
  return pop;
}

}  // namespace loopsim
