#include "fft.hpp"

#include <map>
#include <mutex>
#include <new>

namespace futurefill::detail {

RealBuffer make_real_buffer(std::size_t n) {
  auto* p = static_cast<double*>(fftw_malloc(sizeof(double) * (n == 0 ? 1 : n)));
  if (p == nullptr) throw std::bad_alloc();
  return RealBuffer(p);
}

ComplexBuffer make_complex_buffer(std::size_t n) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n == 0 ? 1 : n)));
  if (p == nullptr) throw std::bad_alloc();
  return ComplexBuffer(p);
}

const RealTransform& RealTransform::of_size(std::size_t n) {
  static std::mutex planner_mutex;
  static std::map<std::size_t, std::unique_ptr<RealTransform>> plans;

  std::lock_guard lock(planner_mutex);
  auto& slot = plans[n];
  if (!slot) {
    auto in = make_real_buffer(n);
    auto out = make_complex_buffer(n / 2 + 1);
    const int len = static_cast<int>(n);
    fftw_plan fwd = fftw_plan_dft_r2c_1d(len, in.get(), out.get(), FFTW_ESTIMATE);
    fftw_plan inv = fftw_plan_dft_c2r_1d(len, out.get(), in.get(), FFTW_ESTIMATE);
    slot = std::make_unique<RealTransform>(n, fwd, inv);
  }
  return *slot;
}

void RealTransform::forward(double* in, fftw_complex* out) const {
  fftw_execute_dft_r2c(fwd_, in, out);
}

void RealTransform::inverse(fftw_complex* in, double* out) const {
  fftw_execute_dft_c2r(inv_, in, out);
}

}  // namespace futurefill::detail
