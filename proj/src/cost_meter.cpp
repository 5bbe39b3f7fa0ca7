#include "futurefill/cost_meter.hpp"

#include <bit>

namespace futurefill {

CostMeter& CostMeter::operator+=(const CostMeter& other) {
  mac_count += other.mac_count;
  ff_cost += other.ff_cost;
  cache_rebuilds += other.cache_rebuilds;
  fast_convolutions += other.fast_convolutions;
  peak_aux_elems = std::max(peak_aux_elems, other.peak_aux_elems);
  peak_transform_elems = std::max(peak_transform_elems, other.peak_transform_elems);
  return *this;
}

CostMeter combine_concurrent(const CostMeter& a, const CostMeter& b) {
  CostMeter out = a;
  out += b;
  out.peak_aux_elems = a.peak_aux_elems + b.peak_aux_elems;
  out.peak_transform_elems = a.peak_transform_elems + b.peak_transform_elems;
  return out;
}

std::uint64_t transform_work(std::uint64_t n) {
  if (n <= 1) return 0;
  return n * static_cast<std::uint64_t>(std::bit_width(n) - 1);
}

}  // namespace futurefill
