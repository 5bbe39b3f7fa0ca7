#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace futurefill {

// Index convention: storage is 0-based; every "position" argument in this
// library is 1-based, with position s stored at index s-1. Reads outside
// [1, size()] return zero.

/// Finite real-valued sequence. Construction rejects NaN/Inf.
class Signal {
 public:
  Signal() = default;
  explicit Signal(std::vector<double> samples);
  Signal(std::initializer_list<double> samples);
  static Signal zeros(std::size_t n);

  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  /// 1-based zero-extended read.
  double at(std::ptrdiff_t position) const noexcept {
    if (position < 1 || static_cast<std::size_t>(position) > samples_.size()) return 0.0;
    return samples_[static_cast<std::size_t>(position - 1)];
  }
  double operator[](std::size_t index) const noexcept { return samples_[index]; }

  std::span<const double> view() const noexcept { return samples_; }
  const std::vector<double>& values() const noexcept { return samples_; }

  /// Positions first..last (1-based, inclusive), zero-read outside the stored range.
  Signal slice(std::ptrdiff_t first, std::ptrdiff_t last) const;

  friend bool operator==(const Signal&, const Signal&) = default;

 private:
  std::vector<double> samples_;
};

/// Convolution kernel of declared context length. Taps beyond the stored
/// ones read as zero.
class Filter {
 public:
  Filter(Signal taps, std::size_t context_length);
  explicit Filter(Signal taps);

  const Signal& taps() const noexcept { return taps_; }
  std::size_t context_length() const noexcept { return context_length_; }

  /// 1-based tap, zero beyond the stored taps.
  double tap(std::ptrdiff_t position) const noexcept { return taps_.at(position); }

  /// Taps 1..n, zero-padded or truncated to exactly n samples.
  std::vector<double> prefix(std::size_t n) const;

 private:
  Signal taps_;
  std::size_t context_length_;
};

}  // namespace futurefill
