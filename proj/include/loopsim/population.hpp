#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "loopsim/random.hpp"

namespace loopsim {

// Index into the configured group list (G1 = 0, G2 = 1 in the case study).
struct GroupId {
  std::uint32_t index = 0;

  friend bool operator==(GroupId, GroupId) = default;
  friend auto operator<=>(GroupId, GroupId) = default;
};

// Per-group distribution parameters: latent interest, feature realization,
// outcome realization and initial-training sample size.
struct GroupParams {
  double mu_theta = 0.5;
  double sigma_theta = 0.0;
  double mu_r = 0.0;
  double sigma_r = 0.0;
  double mu_t = 0.0;
  double sigma_t = 0.0;
  std::size_t n_train = 0;

  friend bool operator==(const GroupParams&, const GroupParams&) = default;
};

// Throws ConfigError naming the offending field.
void validate(const GroupParams& params, const std::string& context);

// How additive outcome noise is folded back into [0, 1].
//   kTruncated: p ~ N(theta + mu_t, sigma_t) conditioned on [0, 1]
//   kClamped:   p = clamp(theta + N(mu_t, sigma_t), 0, 1)
enum class OutcomeNoise { kTruncated, kClamped };

struct Individual {
  std::uint64_t id = 0;
  GroupId group;
  double theta = 0.0;          // latent interest, always in [0, 1]
  double initial_theta = 0.0;  // theta when the individual joined
  double x = 0.0;              // observed feature, always in [0, 1]
  std::uint64_t recommended_count = 0;
  std::uint64_t clicked_count = 0;
};

class Population {
 public:
  Population() = default;
  explicit Population(std::size_t group_count) : group_counts_(group_count, 0) {}

  const std::vector<Individual>& members() const { return members_; }
  const Individual& at(std::size_t slot) const { return members_.at(slot); }
  Individual& at(std::size_t slot) { return members_.at(slot); }
  std::size_t size() const { return members_.size(); }

  const std::vector<std::size_t>& group_counts() const { return group_counts_; }
  std::size_t count(GroupId g) const { return group_counts_.at(g.index); }

  void add(Individual individual);
  // Puts `individual` in place of whoever occupies `slot`.
  void replace(std::size_t slot, Individual individual);

  std::uint64_t next_id() { return next_id_++; }

  // Recounts members and checks every per-individual invariant.
  void check_invariants() const;

  friend bool operator==(const Population&, const Population&);

 private:
  std::vector<Individual> members_;
  std::vector<std::size_t> group_counts_;
  std::uint64_t next_id_ = 0;
};

bool operator==(const Individual& a, const Individual& b);

// Normal(mu, sigma) conditioned on [lo, hi] by rejection; sigma == 0 gives
// clamp(mu, lo, hi). Gives up with ConfigError after 1000 rejected draws.
double draw_truncated_normal(double mu, double sigma, double lo, double hi,
                             RandomSource& rng);

inline constexpr int kMaxTruncationAttempts = 1000;

// clamp(theta + eps, 0, 1) with eps ~ N(mu_r, sigma_r).
double realize_feature(double theta, const GroupParams& params, RandomSource& rng);

// Click probability before any decision-dependent shift.
double click_probability(double theta, const GroupParams& params,
                         OutcomeNoise noise, RandomSource& rng);

// Same noise model with explicit location/scale; used for the initial
// training labels (mu_t_train, sigma_t_train).
double noisy_probability(double theta, double mu, double sigma,
                         OutcomeNoise noise, RandomSource& rng);

// Bernoulli(p). p must already lie in [0, 1].
int realize_outcome(double p, RandomSource& rng);

struct GroupSpec {
  GroupParams params;
  std::size_t size = 0;
};

// Fresh individual of group `g`: theta from the truncated normal, x from
// realize_feature. Theta and x draws come from the two sources given.
Individual make_individual(std::uint64_t id, GroupId g, const GroupParams& params,
                           RandomSource& theta_rng, RandomSource& feature_rng);

// Builds groups in configuration order: all of G1, then all of G2, ...
Population init_population(const std::vector<GroupSpec>& groups,
                           RandomSource& theta_rng, RandomSource& feature_rng);

}  // namespace loopsim
