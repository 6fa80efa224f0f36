#include "loopsim/random.hpp"

#include <cmath>
#include <numbers>

#include "loopsim/error.hpp"

namespace loopsim {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

inline double to_unit(std::uint32_t lo, std::uint32_t hi) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::string_view stream_name(StreamId id) {
  switch (id) {
    case StreamId::kPopulationInit: return "population-init";
    case StreamId::kUserSelection: return "user-selection";
    case StreamId::kOutcome: return "outcome";
    case StreamId::kFeatureNoise: return "feature-noise";
    case StreamId::kReplacement: return "replacement";
    case StreamId::kTraining: return "training";
  }
  return "unknown";
}

PhiloxStream::PhiloxStream(std::uint64_t seed, StreamId stream)
    : key_{static_cast<std::uint32_t>(seed),
           static_cast<std::uint32_t>(seed >> 32)},
      stream_(stream) {}

PhiloxCounter PhiloxStream::next_block() {
  const PhiloxCounter ctr{static_cast<std::uint32_t>(index_),
                          static_cast<std::uint32_t>(index_ >> 32),
                          static_cast<std::uint32_t>(stream_), 0u};
  ++index_;
  return philox4x32_10(ctr, key_);
}

double PhiloxStream::uniform() {
  const auto block = next_block();
  return to_unit(block[0], block[1]);
}

double PhiloxStream::normal() {
  const auto block = next_block();
  const double u1 = to_unit(block[0], block[1]);
  const double u2 = to_unit(block[2], block[3]);
  return std::sqrt(-2.0 * std::log(1.0 - u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t uniform_index(RandomSource& rng, std::size_t n) {
  if (n == 0) throw UsageError("uniform_index: empty range");
  const auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
  return i < n ? i : n - 1;
}

bool bernoulli(RandomSource& rng, double p) { return rng.uniform() < p; }

}  // namespace loopsim
