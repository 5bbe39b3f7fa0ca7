#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "futurefill/rng.hpp"
#include "futurefill/signal.hpp"

namespace futurefill {

inline void PrintTo(const Signal& s, std::ostream* os) {
  *os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) *os << (i ? ", " : "") << s[i];
  *os << "]";
}

}  // namespace futurefill

namespace futurefill::testing {

inline Signal random_signal(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Signal(std::move(v));
}

inline double max_abs(const Signal& s) {
  double m = 0.0;
  for (double x : s.values()) m = std::max(m, std::abs(x));
  return m;
}

/// Largest elementwise difference; infinity on a length mismatch.
inline double max_diff(const Signal& a, const Signal& b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace futurefill::testing
