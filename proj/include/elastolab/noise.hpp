#pragma once

#include <cmath>
#include <limits>

#include "elastolab/field.hpp"
#include "elastolab/rng.hpp"

namespace elastolab {

// Adds i.i.d. circular complex Gaussian noise scaled so that
// 10*log10(mean |u|^2 / noise variance) = snr_db. Passing +inf disables the
// injection and returns the input unchanged.
inline ComplexField add_noise(const ComplexField& u, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0.0) return u;
  if (!std::isfinite(snr_db)) throw std::invalid_argument("snr_db must be finite or +inf");
  check_field(u);

  double signal_power = 0.0;
  for (const auto& v : u.values) signal_power += std::norm(v);
  signal_power /= static_cast<double>(u.size());
  if (signal_power <= 0.0) throw std::invalid_argument("SNR undefined for an all-zero field");

  const double noise_var = signal_power / std::pow(10.0, snr_db / 10.0);
  const double sigma = std::sqrt(noise_var / 2.0);  // per real/imag component

  Rng rng(seed);
  ComplexField out = u;
  for (auto& v : out.values) v += std::complex<double>(sigma * rng.normal(), sigma * rng.normal());
  return out;
}

}  // namespace elastolab
