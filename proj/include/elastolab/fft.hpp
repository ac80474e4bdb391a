#pragma once

#include <complex>
#include <vector>

#include <fftw3.h>

#include "elastolab/field.hpp"

namespace elastolab {

// Thin FFTW wrapper for in-memory 2D complex transforms. Plans use
// FFTW_ESTIMATE so results are deterministic and input buffers untouched.
namespace fft {

inline void transform_2d(std::vector<std::complex<double>>& data, int height, int width, int sign) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan = fftw_plan_dft_2d(height, width, ptr, ptr, sign, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

inline std::vector<std::complex<double>> forward_2d(const std::vector<std::complex<double>>& in,
                                                    int height, int width) {
  std::vector<std::complex<double>> out = in;
  transform_2d(out, height, width, FFTW_FORWARD);
  return out;
}

inline std::vector<std::complex<double>> inverse_2d(const std::vector<std::complex<double>>& in,
                                                    int height, int width) {
  std::vector<std::complex<double>> out = in;
  transform_2d(out, height, width, FFTW_BACKWARD);
  const double norm = 1.0 / (static_cast<double>(height) * width);
  for (auto& v : out) v *= norm;
  return out;
}

/// Signed frequency in cycles per FOV for DFT bin i of an n-point axis.
inline int bin_frequency(int i, int n) { return i <= n / 2 ? i : i - n; }

}  // namespace fft

}  // namespace elastolab
