#pragma once

#include <algorithm>
#include <cstdint>

namespace futurefill {

/// Deterministic work counters. They depend only on sequence lengths and
/// engine configuration, never on sample values.
struct CostMeter {
  /// Scalar multiply-adds in direct inner products.
  std::uint64_t mac_count = 0;
  /// Transform work charged to FutureFill evaluations.
  std::uint64_t ff_cost = 0;
  std::uint64_t cache_rebuilds = 0;
  /// Peak elements held beyond inputs and filter (cache slots, output scratch).
  /// Transform workspace is tracked separately in peak_transform_elems.
  std::uint64_t peak_aux_elems = 0;
  std::uint64_t peak_transform_elems = 0;
  /// Number of fast (transform based) convolutions performed.
  std::uint64_t fast_convolutions = 0;

  void note_aux(std::uint64_t elems) { peak_aux_elems = std::max(peak_aux_elems, elems); }
  void note_transform(std::uint64_t elems) {
    peak_transform_elems = std::max(peak_transform_elems, elems);
  }

  /// Counters add; peaks take the max.
  CostMeter& operator+=(const CostMeter& other);

  friend bool operator==(const CostMeter&, const CostMeter&) = default;
};

/// Sum of counters where each meter describes a concurrently live component
/// (peaks add instead of taking the max).
CostMeter combine_concurrent(const CostMeter& a, const CostMeter& b);

/// n * log2(n) for a power-of-two transform length n.
std::uint64_t transform_work(std::uint64_t n);

}  // namespace futurefill
