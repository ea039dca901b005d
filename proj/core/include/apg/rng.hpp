#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace apg {

std::uint64_t splitmix64(std::uint64_t x);

/// Hash domains keep streams used for different purposes disjoint.
enum class StreamDomain : std::uint64_t {
  kTrajectory = 0x7472616a,
  kJitter = 0x6a697474,
  kIterate = 0x69746572,
  kSeedFanout = 0x7365656e,
  kSweep = 0x73776570,
};

/// Counter-indexed key: the same (seed, agent, index) always maps to the same
/// stream regardless of the order in which streams are created.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t agent, std::uint64_t index,
                         StreamDomain domain = StreamDomain::kTrajectory);

/// Deterministic random stream. Uniform variates are built from the raw
/// 64-bit engine output so results do not depend on the standard library's
/// distribution implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : engine_(key) {}
  RandomStream(std::uint64_t seed, std::uint64_t agent, std::uint64_t index,
               StreamDomain domain = StreamDomain::kTrajectory)
      : engine_(stream_key(seed, agent, index, domain)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [lo, hi].
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);
  /// Inverse-CDF draw from a probability vector; the last index absorbs rounding.
  std::size_t categorical(std::span<const double> probs);
  double normal();

  std::uint64_t next_raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace apg
