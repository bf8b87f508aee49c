#ifndef SSLO_FFT_HPP
#define SSLO_FFT_HPP

#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace sslo {

// fftw planning is not thread safe; executions on distinct arrays are.
inline std::mutex& fftw_plan_mutex() {
  static std::mutex mu;
  return mu;
}

// in-place 1D complex transform, FFTW sign convention (-1 forward)
inline void fft_1d(std::complex<double>* data, int n, int sign) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(data),
                            reinterpret_cast<fftw_complex*>(data), sign,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(fftw_plan_mutex());
  fftw_destroy_plan(plan);
}

// in-place 2D complex transform, row-major n0 x n1
inline void fft_2d(std::complex<double>* data, int n0, int n1, int sign) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_2d(n0, n1, reinterpret_cast<fftw_complex*>(data),
                            reinterpret_cast<fftw_complex*>(data), sign,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(fftw_plan_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace sslo

#endif  // SSLO_FFT_HPP
