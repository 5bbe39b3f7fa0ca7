#include "futurefill/conv.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "fft.hpp"
#include "futurefill/errors.hpp"

namespace futurefill {

using detail::ComplexBuffer;
using detail::RealBuffer;
using detail::RealTransform;

std::size_t next_pow2(std::size_t n) { return n <= 1 ? 1 : std::bit_ceil(n); }

Signal conv_causal_reference(const Signal& u, const Filter& phi) {
  const std::size_t n = u.size();
  const auto taps = phi.prefix(n);
  std::vector<double> out(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    double acc = 0.0;
    for (std::size_t i = 0; i <= s; ++i) acc += u[i] * taps[s - i];
    out[s] = acc;
  }
  return Signal(std::move(out));
}

Signal conv_full(const Signal& a, const Signal& b, CostMeter* meter) {
  if (a.empty() || b.empty()) return Signal();
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(out_len);
  const auto& fft = RealTransform::of_size(n);
  const std::size_t bins = fft.spectrum_size();

  RealBuffer ra = detail::make_real_buffer(n);
  RealBuffer rb = detail::make_real_buffer(n);
  ComplexBuffer ca = detail::make_complex_buffer(bins);
  ComplexBuffer cb = detail::make_complex_buffer(bins);

  std::fill_n(ra.get(), n, 0.0);
  std::fill_n(rb.get(), n, 0.0);
  std::copy(a.values().begin(), a.values().end(), ra.get());
  std::copy(b.values().begin(), b.values().end(), rb.get());
  fft.forward(ra.get(), ca.get());
  fft.forward(rb.get(), cb.get());
  for (std::size_t k = 0; k < bins; ++k) {
    const double re = ca[k][0] * cb[k][0] - ca[k][1] * cb[k][1];
    const double im = ca[k][0] * cb[k][1] + ca[k][1] * cb[k][0];
    ca[k][0] = re;
    ca[k][1] = im;
  }
  fft.inverse(ca.get(), ra.get());

  const double scale = 1.0 / static_cast<double>(n);
  std::vector<double> out(out_len);
  for (std::size_t s = 0; s < out_len; ++s) out[s] = ra[s] * scale;

  if (meter != nullptr) {
    meter->fast_convolutions += 1;
    meter->ff_cost += transform_work(n);
    meter->note_transform(2 * n + 4 * bins);
  }
  return Signal(std::move(out));
}

Signal futurefill(const Signal& v, const Signal& w, CostMeter* meter) {
  const std::size_t t1 = v.size();
  const std::size_t t2 = w.size();
  if (t2 <= 1) return Signal();
  if (t1 == 0) return Signal::zeros(t2 - 1);
  const Signal full = conv_full(v, w, meter);
  // 1-based positions t1+1 .. t1+t2-1.
  return full.slice(static_cast<std::ptrdiff_t>(t1) + 1, static_cast<std::ptrdiff_t>(t1 + t2 - 1));
}

bool split_check(const Signal& a, const Signal& b, std::size_t t1) {
  const std::size_t t = a.size();
  if (b.size() != t || t1 < 1 || t1 > t) {
    throw ContractViolation("split_check: need 1 <= t1 <= len(a) == len(b), got t1=" +
                            std::to_string(t1) + ", len(a)=" + std::to_string(t) +
                            ", len(b)=" + std::to_string(b.size()));
  }
  const auto whole = conv_causal_reference(a, Filter(b));
  double scale = 0.0;
  for (double x : whole.values()) scale = std::max(scale, std::abs(x));
  const double tol = agreement_tolerance(scale);

  const auto ti = static_cast<std::ptrdiff_t>(t1);
  const auto tt = static_cast<std::ptrdiff_t>(t);
  const auto head = conv_causal_reference(a.slice(1, ti), Filter(b.slice(1, ti)));
  for (std::ptrdiff_t s = 1; s <= ti; ++s) {
    if (std::abs(head.at(s) - whole.at(s)) > tol) return false;
  }
  if (t1 == t) return true;

  const Filter tail_filter(b.slice(1, tt - ti));
  const auto tail = conv_causal_reference(a.slice(ti + 1, tt), tail_filter);
  const auto ff = futurefill(a.slice(1, ti), b);
  for (std::ptrdiff_t s = ti + 1; s <= tt; ++s) {
    if (std::abs(tail.at(s - ti) + ff.at(s - ti) - whole.at(s)) > tol) return false;
  }
  return true;
}

struct FutureFillKernel::SizeState {
  const RealTransform* fft = nullptr;
  ComplexBuffer filter_spectrum;
  RealBuffer real_in;
  RealBuffer real_out;
  ComplexBuffer work;
};

FutureFillKernel::FutureFillKernel(const Filter& phi) : taps_(phi.taps().values()) {}
FutureFillKernel::FutureFillKernel(FutureFillKernel&&) noexcept = default;
FutureFillKernel& FutureFillKernel::operator=(FutureFillKernel&&) noexcept = default;
FutureFillKernel::~FutureFillKernel() = default;

FutureFillKernel::SizeState& FutureFillKernel::state_for(std::size_t n) {
  auto it = states_.find(n);
  if (it != states_.end()) return it->second;

  SizeState st;
  st.fft = &RealTransform::of_size(n);
  const std::size_t bins = st.fft->spectrum_size();
  st.filter_spectrum = detail::make_complex_buffer(bins);
  st.real_in = detail::make_real_buffer(n);
  st.real_out = detail::make_real_buffer(n);
  st.work = detail::make_complex_buffer(bins);

  std::fill_n(st.real_in.get(), n, 0.0);
  std::copy_n(taps_.begin(), std::min(n, taps_.size()), st.real_in.get());
  st.fft->forward(st.real_in.get(), st.filter_spectrum.get());
  return states_.emplace(n, std::move(st)).first->second;
}

void FutureFillKernel::compute(std::span<const double> past, std::span<double> out,
                               bool accumulate, CostMeter* meter, bool charge_ff) {
  const std::size_t t = past.size();
  const std::size_t m = out.size();
  if (m == 0) return;
  if (t == 0) {
    if (!accumulate) std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const std::size_t n = next_pow2(t + m);
  SizeState& st = state_for(n);
  const std::size_t bins = st.fft->spectrum_size();

  std::copy(past.begin(), past.end(), st.real_in.get());
  std::fill(st.real_in.get() + t, st.real_in.get() + n, 0.0);
  st.fft->forward(st.real_in.get(), st.work.get());
  for (std::size_t k = 0; k < bins; ++k) {
    const double re = st.work[k][0] * st.filter_spectrum[k][0] - st.work[k][1] * st.filter_spectrum[k][1];
    const double im = st.work[k][0] * st.filter_spectrum[k][1] + st.work[k][1] * st.filter_spectrum[k][0];
    st.work[k][0] = re;
    st.work[k][1] = im;
  }
  st.fft->inverse(st.work.get(), st.real_out.get());

  const double scale = 1.0 / static_cast<double>(n);
  const double* src = st.real_out.get() + t;
  if (accumulate) {
    for (std::size_t j = 0; j < m; ++j) out[j] += src[j] * scale;
  } else {
    for (std::size_t j = 0; j < m; ++j) out[j] = src[j] * scale;
  }

  if (meter != nullptr) {
    meter->fast_convolutions += 1;
    if (charge_ff) meter->ff_cost += transform_work(n);
    meter->note_transform(cached_elems());
  }
}

std::size_t FutureFillKernel::cached_elems() const noexcept {
  std::size_t total = 0;
  for (const auto& [n, st] : states_) total += 2 * n + 4 * st.fft->spectrum_size();
  return total;
}

}  // namespace futurefill
