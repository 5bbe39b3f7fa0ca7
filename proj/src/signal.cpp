#include "futurefill/signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "futurefill/errors.hpp"

namespace futurefill {

Signal::Signal(std::vector<double> samples) : samples_(std::move(samples)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw ContractViolation("Signal: non-finite sample at index " + std::to_string(i));
    }
  }
}

Signal::Signal(std::initializer_list<double> samples) : Signal(std::vector<double>(samples)) {}

Signal Signal::zeros(std::size_t n) { return Signal(std::vector<double>(n, 0.0)); }

Signal Signal::slice(std::ptrdiff_t first, std::ptrdiff_t last) const {
  if (last < first) return Signal();
  std::vector<double> out(static_cast<std::size_t>(last - first + 1));
  for (std::ptrdiff_t p = first; p <= last; ++p) out[static_cast<std::size_t>(p - first)] = at(p);
  Signal s;
  s.samples_ = std::move(out);
  return s;
}

Filter::Filter(Signal taps, std::size_t context_length)
    : taps_(std::move(taps)), context_length_(context_length) {
  if (context_length_ == 0) throw ConfigError("Filter: context length must be positive");
  if (taps_.size() > context_length_) {
    throw ConfigError("Filter: " + std::to_string(taps_.size()) +
                      " taps exceed context length " + std::to_string(context_length_));
  }
}

Filter::Filter(Signal taps) : Filter(taps, std::max<std::size_t>(taps.size(), 1)) {}

std::vector<double> Filter::prefix(std::size_t n) const {
  std::vector<double> out(n, 0.0);
  const std::size_t stored = std::min(n, taps_.size());
  std::copy_n(taps_.values().begin(), stored, out.begin());
  return out;
}

}  // namespace futurefill
