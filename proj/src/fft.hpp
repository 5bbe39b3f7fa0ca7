#pragma once

#include <complex>
#include <cstddef>
#include <memory>

#include <fftw3.h>

namespace futurefill::detail {

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

RealBuffer make_real_buffer(std::size_t n);
ComplexBuffer make_complex_buffer(std::size_t n);

// Real-to-complex transform pair of a fixed length. Plans are created once per
// length under a global lock and shared; execution is reentrant as long as
// each caller uses its own fftw_malloc'd buffers.
class RealTransform {
 public:
  static const RealTransform& of_size(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  std::size_t spectrum_size() const noexcept { return n_ / 2 + 1; }

  void forward(double* in, fftw_complex* out) const;
  // Unnormalized; destroys `in`.
  void inverse(fftw_complex* in, double* out) const;

  RealTransform(std::size_t n, fftw_plan fwd, fftw_plan inv) : n_(n), fwd_(fwd), inv_(inv) {}

 private:
  std::size_t n_;
  fftw_plan fwd_;
  fftw_plan inv_;
};

}  // namespace futurefill::detail
