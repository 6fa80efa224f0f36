#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "loopsim/error.hpp"
#include "loopsim/random.hpp"
#include "support.hpp"

using namespace loopsim;

namespace {

double block_uniform(std::uint32_t lo, std::uint32_t hi) {
  const std::uint64_t bits = (std::uint64_t{hi} << 32) | lo;
  return std::ldexp(static_cast<double>(bits >> 11), -53);
}

}  // namespace

// Known-answer vectors published with the Random123 library.
TEST(Philox, KnownAnswerZeros) {
  const auto out = philox4x32_10({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                 {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  const auto out = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                 {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(PhiloxStream, UniformFollowsCounterLayout) {
  const std::uint64_t seed = 0x0123456789abcdefULL;
  PhiloxStream s(seed, StreamId::kOutcome);
  for (std::uint32_t i = 0; i < 5; ++i) {
    const auto block = philox4x32_10({i, 0, 2, 0}, {0x89abcdefu, 0x01234567u});
    EXPECT_EQ(s.uniform(), block_uniform(block[0], block[1])) << "draw " << i;
  }
  EXPECT_EQ(s.draws(), 5u);
}

TEST(PhiloxStream, NormalIsBoxMullerOfOneBlock) {
  PhiloxStream s(42, StreamId::kTraining);
  for (std::uint32_t i = 0; i < 5; ++i) {
    const auto b = philox4x32_10({i, 0, 5, 0}, {42, 0});
    const double u1 = block_uniform(b[0], b[1]);
    const double u2 = block_uniform(b[2], b[3]);
    const double expected =
        std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
    EXPECT_EQ(s.normal(), expected);
  }
}

TEST(PhiloxStream, SameSeedAndStreamRepeat) {
  PhiloxStream a(9, StreamId::kReplacement);
  PhiloxStream b(9, StreamId::kReplacement);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.uniform(), b.uniform());
}

TEST(PhiloxStream, StreamsAndSeedsDiffer) {
  PhiloxStream a(9, StreamId::kReplacement);
  PhiloxStream b(9, StreamId::kOutcome);
  PhiloxStream c(10, StreamId::kReplacement);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 100; ++i) {
    const double ua = a.uniform();
    same_ab += ua == b.uniform();
    same_ac += ua == c.uniform();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(PhiloxStream, UniformHistogramIsFlat) {
  PhiloxStream s(1, StreamId::kUserSelection);
  constexpr int kBins = 20;
  constexpr int kDraws = 200000;
  std::vector<int> counts(kBins, 0);
  for (int i = 0; i < kDraws; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ++counts[static_cast<int>(u * kBins)];
  }
  double chi2 = 0.0;
  const double expected = static_cast<double>(kDraws) / kBins;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 19 degrees of freedom; 43.82 is the 0.999 quantile.
  EXPECT_LT(chi2, 43.82);
}

TEST(PhiloxStream, NormalMoments) {
  PhiloxStream s(3, StreamId::kFeatureNoise);
  constexpr int kDraws = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double z = s.normal();
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / kDraws;
  const double var = sum2 / kDraws - mean * mean;
  // Five standard errors.
  EXPECT_NEAR(mean, 0.0, 5.0 / std::sqrt(kDraws));
  EXPECT_NEAR(var, 1.0, 5.0 * std::sqrt(2.0 / kDraws));
}

TEST(StreamNames, AllNamed) {
  EXPECT_EQ(stream_name(StreamId::kPopulationInit), "population-init");
  EXPECT_EQ(stream_name(StreamId::kUserSelection), "user-selection");
  EXPECT_EQ(stream_name(StreamId::kOutcome), "outcome");
  EXPECT_EQ(stream_name(StreamId::kFeatureNoise), "feature-noise");
  EXPECT_EQ(stream_name(StreamId::kReplacement), "replacement");
  EXPECT_EQ(stream_name(StreamId::kTraining), "training");
}

TEST(UniformIndex, MapsUnitIntervalOntoRange) {
  support::ScriptedSource s({0.0, 0.249, 0.25, 0.9999999999999999});
  EXPECT_EQ(uniform_index(s, 4), 0u);
  EXPECT_EQ(uniform_index(s, 4), 0u);
  EXPECT_EQ(uniform_index(s, 4), 1u);
  EXPECT_EQ(uniform_index(s, 4), 3u);
}

TEST(UniformIndex, EmptyRangeIsUsageError) {
  support::ScriptedSource s({0.5});
  EXPECT_THROW(uniform_index(s, 0), UsageError);
}

TEST(Bernoulli, Extremes) {
  PhiloxStream s(5, StreamId::kOutcome);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_FALSE(bernoulli(s, 0.0));
    EXPECT_TRUE(bernoulli(s, 1.0));
  }
}
