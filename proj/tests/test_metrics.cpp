#include <gtest/gtest.h>

#include <cmath>

#include "loopsim/error.hpp"
#include "loopsim/metrics.hpp"
#include "loopsim/presets.hpp"

using namespace loopsim;

namespace {

FeedbackConfig loops_from_mask(unsigned mask) {
  FeedbackConfig fb;
  fb.sampling_enabled = mask & 1u;
  fb.individual_enabled = mask & 2u;
  fb.feature_enabled = mask & 4u;
  fb.ml_model_enabled = mask & 8u;
  fb.outcome_enabled = mask & 16u;
  return fb;
}

// Trace with one checkpoint at step 50 holding `counts` users per group.
Trace counted_trace(const std::vector<std::size_t>& counts) {
  Trace t;
  CheckpointRecord cp;
  cp.step = 50;
  cp.group_counts = counts;
  std::uint64_t id = 0;
  for (std::size_t g = 0; g < counts.size(); ++g) {
    for (std::size_t i = 0; i < counts[g]; ++i) {
      const double theta = 0.1 + 0.8 * static_cast<double>(i % 7) / 6.0;
      cp.users.push_back({id++, GroupId{static_cast<std::uint32_t>(g)}, theta, theta,
                          theta, theta});
    }
  }
  cp.stats = checkpoint_stats(cp.users, counts.size());
  t.checkpoints.push_back(cp);
  return t;
}

}  // namespace

TEST(BiasAnnotation, SingleLoops) {
  using K = BiasKind;
  EXPECT_EQ(bias_annotation(loops_from_mask(0)).kinds, std::set<K>{});
  EXPECT_EQ(bias_annotation(loops_from_mask(1)).kinds, std::set<K>{K::kRepresentation});
  EXPECT_EQ(bias_annotation(loops_from_mask(2)).kinds, std::set<K>{K::kHistorical});
  EXPECT_EQ(bias_annotation(loops_from_mask(4)).kinds, std::set<K>{K::kMeasurement});
  EXPECT_EQ(bias_annotation(loops_from_mask(8)).kinds, std::set<K>{K::kRepresentation});
  EXPECT_EQ(bias_annotation(loops_from_mask(16)).kinds, std::set<K>{K::kMeasurement});
  EXPECT_EQ(bias_annotation(loops_from_mask(1 | 16)).kinds,
            (std::set<K>{K::kRepresentation, K::kMeasurement}));
}

// The annotation of any loop set is the union of its members' annotations.
TEST(BiasAnnotation, UnionOverAllSubsets) {
  for (unsigned mask = 0; mask < 32; ++mask) {
    std::set<BiasKind> expected;
    std::set<RepresentationNuance> nuances;
    for (unsigned bit = 0; bit < 5; ++bit) {
      if (!(mask & (1u << bit))) continue;
      const auto single = bias_annotation(loops_from_mask(1u << bit));
      expected.insert(single.kinds.begin(), single.kinds.end());
      nuances.insert(single.nuances.begin(), single.nuances.end());
    }
    const auto a = bias_annotation(loops_from_mask(mask));
    EXPECT_EQ(a.kinds, expected) << "mask " << mask;
    EXPECT_EQ(a.nuances, nuances) << "mask " << mask;
    // Nuances only qualify representation bias.
    EXPECT_EQ(a.nuances.empty(), !a.kinds.contains(BiasKind::kRepresentation));
    for (unsigned sub = mask; sub != 0; sub = (sub - 1) & mask) {
      const auto s = bias_annotation(loops_from_mask(sub));
      for (auto k : s.kinds) EXPECT_TRUE(a.kinds.contains(k));
    }
  }
}

TEST(BiasAnnotation, EvaluationAdvisoryNeedsHeldOutData) {
  EXPECT_FALSE(bias_annotation(loops_from_mask(8)).evaluation_bias_advisory);
  EXPECT_TRUE(bias_annotation(loops_from_mask(8), 0.2).evaluation_bias_advisory);
  EXPECT_FALSE(bias_annotation(loops_from_mask(1), 0.2).evaluation_bias_advisory);
}

TEST(BiasAnnotation, Names) {
  EXPECT_EQ(bias_name(BiasKind::kHistorical), "historical");
  EXPECT_EQ(nuance_name(RepresentationNuance::kTargetVsUse), "target-vs-use");
}

TEST(RepresentationShare, Examples) {
  EXPECT_DOUBLE_EQ(representation_share(counted_trace({914, 86}), GroupId{1}, 50), 0.086);
  EXPECT_DOUBLE_EQ(representation_share(counted_trace({500, 500}), GroupId{0}, 50), 0.5);
  EXPECT_EQ(representation_share(counted_trace({1000, 0}), GroupId{1}, 50), 0.0);
}

TEST(RepresentationShare, Errors) {
  Trace t = counted_trace({3, 2});
  EXPECT_THROW(representation_share(t, GroupId{0}, 49), UsageError);
  EXPECT_THROW(representation_share(t, GroupId{2}, 50), UsageError);
  t.checkpoints[0].group_counts = {3, 3};
  EXPECT_THROW(representation_share(t, GroupId{0}, 50), InvariantError);
}

TEST(ErrorStats, ExactMeasurementAndPredictionAreZero) {
  const Trace t = counted_trace({10, 4});
  for (const auto& s : measurement_error_stats(t, 50)) {
    EXPECT_EQ(s.mean, 0.0);
    EXPECT_EQ(s.whisker_lo, 0.0);
    EXPECT_EQ(s.whisker_hi, 0.0);
  }
  for (auto ref : {ErrorReference::kExpectedOutcome, ErrorReference::kTheta}) {
    for (const auto& s : prediction_error_stats(t, 50, ref)) {
      EXPECT_EQ(s.mean, 0.0);
      EXPECT_EQ(s.median, 0.0);
    }
  }
}

// Stored statistics agree with a recomputation from the user snapshot, and
// shares over groups sum to one.
TEST(ErrorStats, RecomputableFromSnapshot) {
  SimulationConfig c = preset("sampling");
  c.total_steps = 1000;
  c.checkpoints = {0, 1000};
  const Trace t = run(c);
  for (const auto& cp : t.checkpoints) {
    const auto again = checkpoint_stats(cp.users, 2);
    for (auto f : kAllStatFamilies) {
      const auto& stored = checkpoint_family(t, cp.step, f);
      for (std::size_t g = 0; g < 2; ++g) {
        EXPECT_EQ(stored[g].mean, again.at(f)[g].mean);
        EXPECT_EQ(stored[g].median, again.at(f)[g].median);
        EXPECT_EQ(stored[g].outliers, again.at(f)[g].outliers);
      }
    }
    EXPECT_NEAR(representation_share(t, GroupId{0}, cp.step) +
                    representation_share(t, GroupId{1}, cp.step),
                1.0, 1e-15);
  }
}
