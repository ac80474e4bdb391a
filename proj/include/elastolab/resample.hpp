#pragma once

#include <algorithm>
#include <cmath>

#include "elastolab/field.hpp"

namespace elastolab {

namespace detail {

inline int resampled_dim(int n, double spacing_in, double spacing_out) {
  return static_cast<int>(std::lround((n - 1) * spacing_in / spacing_out)) + 1;
}

}  // namespace detail

// Bilinear resampling onto a grid with the given spacing. Samples sit at
// node positions j * spacing, so output dim = round((n-1)*s_in/s_out) + 1.
// Bilinear is monotone: output values stay within the input min/max.
template <typename T>
Grid2<T> resample(const Grid2<T>& in, double target_spacing_mm) {
  if (!(target_spacing_mm > 0.0)) throw std::invalid_argument("target spacing must be > 0");
  const int out_h = detail::resampled_dim(in.height, in.spacing_mm, target_spacing_mm);
  const int out_w = detail::resampled_dim(in.width, in.spacing_mm, target_spacing_mm);
  if (out_h < 2 || out_w < 2) throw std::invalid_argument("resample output is degenerate (< 2 px)");

  Grid2<T> out(out_h, out_w, target_spacing_mm);
  const double scale = target_spacing_mm / in.spacing_mm;
  for (int r = 0; r < out_h; ++r) {
    double src_r = r * scale;
    src_r = std::clamp(src_r, 0.0, static_cast<double>(in.height - 1));
    const int r0 = std::min(static_cast<int>(src_r), in.height - 2);
    const double fr = src_r - r0;
    for (int c = 0; c < out_w; ++c) {
      double src_c = c * scale;
      src_c = std::clamp(src_c, 0.0, static_cast<double>(in.width - 1));
      const int c0 = std::min(static_cast<int>(src_c), in.width - 2);
      const double fc = src_c - c0;
      const T v00 = in.at(r0, c0);
      const T v01 = in.at(r0, c0 + 1);
      const T v10 = in.at(r0 + 1, c0);
      const T v11 = in.at(r0 + 1, c0 + 1);
      out.at(r, c) = v00 * ((1.0 - fr) * (1.0 - fc)) + v01 * ((1.0 - fr) * fc) +
                     v10 * (fr * (1.0 - fc)) + v11 * (fr * fc);
    }
  }
  return out;
}

}  // namespace elastolab
