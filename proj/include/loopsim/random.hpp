#pragma once

// Counter-based random streams.
//
// Every draw is a pure function of (seed, stream, draw index): the Philox4x32
// block cipher (10 rounds) is applied to the counter
//   {index_lo, index_hi, stream_id, 0}
// under the key {seed_lo, seed_hi}. One block is consumed per draw, whatever
// the distribution, so an implementation in another language that follows the
// conversions below reproduces a run bit for bit.
//
//   uniform : (((uint64)w1 << 32 | w0) >> 11) * 2^-53            in [0, 1)
//   normal  : Box-Muller, u1 from (w0, w1), u2 from (w2, w3):
//             sqrt(-2 ln(1 - u1)) * cos(2 pi u2)

#include <array>
#include <cstdint>
#include <string_view>

namespace loopsim {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

// Named streams. Each pipeline stage draws from its own stream, so enabling
// one feedback loop never shifts the draws seen by another.
enum class StreamId : std::uint32_t {
  kPopulationInit = 0,
  kUserSelection = 1,
  kOutcome = 2,
  kFeatureNoise = 3,
  kReplacement = 4,
  kTraining = 5,
};

std::string_view stream_name(StreamId id);

// Source of uniform and standard-normal variates. The simulator only ever
// talks to this interface; tests substitute scripted sources.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual double uniform() = 0;  // [0, 1)
  virtual double normal() = 0;   // N(0, 1)
};

class PhiloxStream final : public RandomSource {
 public:
  PhiloxStream(std::uint64_t seed, StreamId stream);

  double uniform() override;
  double normal() override;

  std::uint64_t draws() const { return index_; }
  StreamId id() const { return stream_; }

 private:
  PhiloxCounter next_block();

  PhiloxKey key_;
  StreamId stream_;
  std::uint64_t index_ = 0;
};

// Uniform index in [0, n). n must be positive.
std::size_t uniform_index(RandomSource& rng, std::size_t n);

// True with probability p (p outside [0, 1] saturates).
bool bernoulli(RandomSource& rng, double p);

}  // namespace loopsim
