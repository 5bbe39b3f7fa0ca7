#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace futurefill {

/// SplitMix64 step: advances state and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Derives an independent stream seed from a base seed, a label and two
/// integers (e.g. engine name, length, trial). FNV-1a over the label, then
/// SplitMix64 finalization of the combined words.
std::uint64_t stream_seed(std::uint64_t base, std::string_view label, std::uint64_t a = 0,
                          std::uint64_t b = 0);

/// std::mt19937_64 plus distribution code written out explicitly, since the
/// standard distributions are not reproducible across library vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace futurefill
