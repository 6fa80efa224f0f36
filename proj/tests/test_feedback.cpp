#include <gtest/gtest.h>

#include <cmath>

#include "loopsim/error.hpp"
#include "loopsim/feedback.hpp"
#include "support.hpp"

using namespace loopsim;
using support::ScriptedSource;

// Closed forms of the linear recursion theta' = (1 - a) theta + a d:
//   d = 1: theta_k = 1 - (1 - a)^k (1 - theta_0)
//   d = 0: theta_k = (1 - a)^k theta_0
TEST(IndividualFeedback, MatchesClosedForm) {
  for (double alpha : {0.01, 0.05, 0.3, 1.0}) {
    for (double theta0 : {0.0, 0.2, 0.77, 1.0}) {
      double up = theta0, down = theta0;
      for (int k = 1; k <= 200; ++k) {
        up = apply_individual_feedback(up, 1, alpha);
        down = apply_individual_feedback(down, 0, alpha);
        EXPECT_NEAR(up, 1.0 - std::pow(1.0 - alpha, k) * (1.0 - theta0), 1e-12);
        EXPECT_NEAR(down, std::pow(1.0 - alpha, k) * theta0, 1e-12);
        ASSERT_GE(down, 0.0);
        ASSERT_LE(up, 1.0);
      }
    }
  }
}

TEST(IndividualFeedback, ConvexStep) {
  EXPECT_NEAR(apply_individual_feedback(0.6, 1, 0.1), 0.64, 1e-15);
  EXPECT_NEAR(apply_individual_feedback(0.6, 0, 0.1), 0.54, 1e-15);
}

TEST(FeatureFeedback, ConvexStep) {
  EXPECT_NEAR(apply_feature_feedback(0.3, 1, 0.1), 0.37, 1e-15);
  EXPECT_NEAR(apply_feature_feedback(0.3, 0, 0.1), 0.27, 1e-15);
}

// Starting from the biased x = 0.3 with clicks at rate 0.5, the average
// over seeds settles near the click rate.
TEST(FeatureFeedback, ConvergesToClickRate) {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    PhiloxStream rng(seed, StreamId::kOutcome);
    double x = 0.3;
    for (int k = 0; k < 5000; ++k) x = apply_feature_feedback(x, bernoulli(rng, 0.5), 0.05);
    total += x;
  }
  EXPECT_NEAR(total / 100.0, 0.5, 0.03);
}

TEST(FeatureFeedback, MovingAverageClosedForm) {
  const double beta = 0.05;
  double x = 0.3;
  for (int k = 1; k <= 100; ++k) {
    x = apply_feature_feedback(x, 1, beta);
    EXPECT_NEAR(x, 1.0 - std::pow(1.0 - beta, k) * 0.7, 1e-12);
  }
  EXPECT_DOUBLE_EQ(apply_feature_feedback(0.4, 0, 0.5), 0.2);
}

TEST(OutcomeFeedback, ShiftsAndClamps) {
  EXPECT_DOUBLE_EQ(shifted_click_probability(0.5, 1, 0.2), 0.7);
  EXPECT_DOUBLE_EQ(shifted_click_probability(0.5, 0, 0.2), 0.3);
  EXPECT_EQ(shifted_click_probability(0.9, 1, 0.2), 1.0);
  EXPECT_EQ(shifted_click_probability(0.1, 0, 0.2), 0.0);
  EXPECT_EQ(shifted_click_probability(0.42, 1, 0.0), 0.42);
}

TEST(MlModelFeedback, GateDropsUnrecommendedPairs) {
  Dataset d;
  const LabeledPair p{0.4, 1, {}};
  gate_dataset_append(d, p, 0, false);
  gate_dataset_append(d, p, 1, false);
  EXPECT_EQ(d.size(), 2u);
  gate_dataset_append(d, p, 0, true);
  EXPECT_EQ(d.size(), 2u);
  gate_dataset_append(d, p, 1, true);
  EXPECT_EQ(d.size(), 3u);
}

namespace {

Population four_users() {
  Population pop(2);
  for (int i = 0; i < 3; ++i) pop.add({pop.next_id(), GroupId{0}, 0.8, 0.8, 0.8, 0, 0});
  pop.add({pop.next_id(), GroupId{1}, 0.2, 0.2, 0.2, 0, 0});
  return pop;
}

std::vector<GroupParams> two_groups() {
  GroupParams g1;
  g1.mu_theta = 0.7;
  g1.sigma_theta = 0.15;
  GroupParams g2 = g1;
  g2.mu_theta = 0.3;
  return {g1, g2};
}

}  // namespace

TEST(SamplingFeedback, KeepsRecommendedUsers) {
  Population pop = four_users();
  const Population before = pop;
  ScriptedSource none;
  apply_sampling_feedback(pop, 3, 1, two_groups(), none);
  EXPECT_EQ(pop, before);
}

// Counts {3, 1}, n = 4: u * 4 < 3 picks G1, otherwise G2. The newcomer's
// theta is 0.3 + 0.15 * z from the same stream.
TEST(SamplingFeedback, ReplacesByInverseCdf) {
  {
    Population pop = four_users();
    ScriptedSource s({0.74}, {1.0});
    apply_sampling_feedback(pop, 3, 0, two_groups(), s);
    EXPECT_EQ(pop.size(), 4u);
    EXPECT_EQ(pop.at(3).group.index, 0u);
    EXPECT_EQ(pop.at(3).id, 4u);
    EXPECT_DOUBLE_EQ(pop.at(3).theta, 0.85);
    EXPECT_EQ(pop.group_counts(), (std::vector<std::size_t>{4, 0}));
    EXPECT_EQ(s.remaining(), 0u);
  }
  {
    Population pop = four_users();
    ScriptedSource s({0.76}, {-1.0});
    apply_sampling_feedback(pop, 0, 0, two_groups(), s);
    EXPECT_EQ(pop.at(0).group.index, 1u);
    EXPECT_DOUBLE_EQ(pop.at(0).theta, 0.15);
    EXPECT_EQ(pop.group_counts(), (std::vector<std::size_t>{2, 2}));
    EXPECT_NO_THROW(pop.check_invariants());
  }
}

TEST(SamplingFeedback, NewcomerShareFollowsGroupShare) {
  PhiloxStream rng(6, StreamId::kReplacement);
  constexpr int kTrials = 40000;
  int g2 = 0;
  for (int i = 0; i < kTrials; ++i) {
    Population pop = four_users();  // G2 share 1/4 before departure
    apply_sampling_feedback(pop, 0, 0, two_groups(), rng);
    g2 += pop.at(0).group.index == 1;
  }
  const double share = static_cast<double>(g2) / kTrials;
  EXPECT_NEAR(share, 0.25, 5.0 * std::sqrt(0.25 * 0.75 / kTrials));
}

TEST(SamplingFeedback, MismatchedGroupsIsUsageError) {
  Population pop = four_users();
  ScriptedSource s({0.1}, {0.0});
  EXPECT_THROW(apply_sampling_feedback(pop, 0, 0, {GroupParams{}}, s), UsageError);
}

TEST(FeedbackConfigValidation, RejectsOutOfRangeRates) {
  FeedbackConfig c;
  c.alpha = 0.0;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.beta = 1.5;
  EXPECT_THROW(validate(c), ConfigError);
  c = {};
  c.delta = -0.1;
  EXPECT_THROW(validate(c), ConfigError);
  EXPECT_NO_THROW(validate(FeedbackConfig{}));
}
