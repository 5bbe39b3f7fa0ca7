#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "futurefill/cost_meter.hpp"
#include "futurefill/signal.hpp"

namespace futurefill {

/// Smallest power of two >= n (1 for n == 0).
std::size_t next_pow2(std::size_t n);

/// Tolerance for fast-vs-direct agreement: 1e-9 * (1 + scale).
inline double agreement_tolerance(double scale) { return 1e-9 * (1.0 + scale); }

/// Causal convolution by direct summation, Theta(n^2):
///   out_s = sum_{i=1}^{s} u_i * phi_{s+1-i},  s = 1..len(u).
/// This is the ground truth every fast path is checked against.
Signal conv_causal_reference(const Signal& u, const Filter& phi);

/// Full linear convolution (length len(a)+len(b)-1, empty if either operand
/// is empty), computed with one real FFT product padded to a power of two.
Signal conv_full(const Signal& a, const Signal& b, CostMeter* meter = nullptr);

/// Contribution of all of v (length t1) to the positions of v*w strictly
/// after v ends:
///   out_s = sum_{i=1}^{t2-s} v_{t1-i+1} * w_{s+i},  s = 1..t2-1,
/// i.e. positions t1+1 .. t1+t2-1 of conv_full(v, w). Empty when len(w) <= 1.
Signal futurefill(const Signal& v, const Signal& w, CostMeter* meter = nullptr);

/// Checks the split identity of the convolution a*b at split point t1
/// (1 <= t1 <= len(a) == len(b)) against the causal reference: positions
/// s <= t1 come from the prefixes alone, positions s > t1 from the suffix
/// convolution plus futurefill(a_{1:t1}, b).
bool split_check(const Signal& a, const Signal& b, std::size_t t1);

/// Streaming FutureFill against one fixed filter.
///
/// compute(past, out) fills out_j = [futurefill(past, phi_{1:t+m})]_j for
/// j = 1..m, with t = len(past), m = len(out). Only filter taps up to t+m can
/// reach those positions, so a circular product of size n = next_pow2(t+m)
/// against phi_{1:n} is exact there. Filter spectra are cached per size.
class FutureFillKernel {
 public:
  explicit FutureFillKernel(const Filter& phi);
  FutureFillKernel(FutureFillKernel&&) noexcept;
  FutureFillKernel& operator=(FutureFillKernel&&) noexcept;
  ~FutureFillKernel();

  /// When accumulate is set the result is added into out instead of
  /// overwriting it. Charges transform_work(n) to meter->ff_cost unless
  /// charge_ff is false.
  void compute(std::span<const double> past, std::span<double> out, bool accumulate,
               CostMeter* meter, bool charge_ff = true);

  /// Total doubles held in cached spectra and workspaces.
  std::size_t cached_elems() const noexcept;

 private:
  struct SizeState;
  SizeState& state_for(std::size_t n);

  std::vector<double> taps_;
  std::map<std::size_t, SizeState> states_;
};

}  // namespace futurefill
