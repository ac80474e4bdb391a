#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <utility>
#include <vector>

#include "elastolab/fft.hpp"
#include "elastolab/field.hpp"

namespace elastolab {

struct FilterBankConfig {
  double low_cut_waves = 2.0;
  double high_cut_waves = 128.0;
  int butterworth_order = 4;
  std::vector<double> direction_deg = {0.0, 90.0, 180.0, 270.0};

  void validate() const {
    if (!(low_cut_waves > 0.0) || !(low_cut_waves < high_cut_waves))
      throw std::invalid_argument("need 0 < low_cut < high_cut");
    if (butterworth_order < 1) throw std::invalid_argument("butterworth order must be >= 1");
    // cos^2 windows with 90 deg half-width partition angle space only for
    // four orthogonal directions.
    if (direction_deg.size() != 4) throw std::invalid_argument("need exactly 4 directions");
    for (int k = 1; k < 4; ++k) {
      const double gap = std::fmod(direction_deg[k] - direction_deg[0] + 3600.0, 360.0);
      if (std::abs(gap - 90.0 * k) > 1e-9)
        throw std::invalid_argument("directions must be 90 degrees apart");
    }
  }
};

struct InversionConfig {
  double density_kg_m3 = 1000.0;
  double frequency_hz = 60.0;
  std::vector<int> laplacian_scales = {1, 2};
  double amplitude_floor = 1e-3;  // relative to max |u| in the field

  void validate() const {
    if (!(density_kg_m3 > 0.0) || !(frequency_hz > 0.0))
      throw std::invalid_argument("density and frequency must be > 0");
    if (laplacian_scales.empty()) throw std::invalid_argument("need at least one scale");
    for (int s : laplacian_scales)
      if (s < 1) throw std::invalid_argument("laplacian scales must be >= 1");
    if (!(amplitude_floor >= 0.0)) throw std::invalid_argument("amplitude floor must be >= 0");
  }
};

namespace detail {

inline double butterworth_response(double r, const FilterBankConfig& cfg) {
  if (r <= 0.0) return 0.0;
  const double n2 = 2.0 * cfg.butterworth_order;
  const double hp = 1.0 / std::sqrt(1.0 + std::pow(cfg.low_cut_waves / r, n2));
  const double lp = 1.0 / std::sqrt(1.0 + std::pow(r / cfg.high_cut_waves, n2));
  return hp * lp;
}

}  // namespace detail

/// Radial Butterworth bandpass in waves/FOV; removes DC exactly (H(0) = 0).
inline ComplexField bandpass(const ComplexField& u, const FilterBankConfig& cfg) {
  cfg.validate();
  if (u.height < 16 || u.width < 16) throw std::invalid_argument("bandpass needs a field >= 16x16");
  auto spectrum = fft::forward_2d(u.values, u.height, u.width);
  for (int i = 0; i < u.height; ++i) {
    const double fy = fft::bin_frequency(i, u.height);
    for (int j = 0; j < u.width; ++j) {
      const double fx = fft::bin_frequency(j, u.width);
      const double r = std::sqrt(fx * fx + fy * fy);
      spectrum[static_cast<std::size_t>(i) * u.width + j] *= detail::butterworth_response(r, cfg);
    }
  }
  ComplexField out(u.height, u.width, u.spacing_mm);
  out.values = fft::inverse_2d(spectrum, u.height, u.width);
  return out;
}

// Splits into 4 direction components with cos^2 angular windows of 90 deg
// half-width. The windows sum to one at every frequency bin (the DC bin is
// shared equally), so the components add back to the input exactly.
inline std::vector<ComplexField> directional_split(const ComplexField& u, const FilterBankConfig& cfg) {
  cfg.validate();
  const auto spectrum = fft::forward_2d(u.values, u.height, u.width);
  std::vector<ComplexField> parts;
  parts.reserve(cfg.direction_deg.size());
  for (double deg : cfg.direction_deg) {
    const double rad = deg * 3.14159265358979323846 / 180.0;
    const double cx = std::cos(rad);
    const double cy = std::sin(rad);
    auto windowed = spectrum;
    for (int i = 0; i < u.height; ++i) {
      const double fy = fft::bin_frequency(i, u.height);
      for (int j = 0; j < u.width; ++j) {
        const double fx = fft::bin_frequency(j, u.width);
        const double s = fx * fx + fy * fy;
        double w;
        if (s == 0.0) {
          w = 0.25;
        } else {
          const double proj = fx * cx + fy * cy;
          w = proj > 0.0 ? proj * proj / s : 0.0;
        }
        windowed[static_cast<std::size_t>(i) * u.width + j] *= w;
      }
    }
    ComplexField part(u.height, u.width, u.spacing_mm);
    part.values = fft::inverse_2d(windowed, u.height, u.width);
    parts.push_back(std::move(part));
  }
  return parts;
}

struct DirectionEstimate {
  ScalarField mu;      // Pa; zero where weight is zero
  ScalarField weight;  // amplitude x curvature, summed over scales
};

// Algebraic Helmholtz inversion mu = rho w^2 |u| / |lap u| per Laplacian
// scale, combined with amplitude x curvature weights. Pixels below the
// amplitude floor get zero weight.
inline DirectionEstimate invert_direction(const ComplexField& u_d, const InversionConfig& cfg) {
  cfg.validate();
  check_field(u_d);
  const double omega = 2.0 * 3.14159265358979323846 * cfg.frequency_hz;
  const double rho_w2 = cfg.density_kg_m3 * omega * omega;

  double max_amp = 0.0;
  for (const auto& v : u_d.values) max_amp = std::max(max_amp, std::abs(v));
  const double floor = cfg.amplitude_floor * max_amp;

  DirectionEstimate est{ScalarField(u_d.height, u_d.width, u_d.spacing_mm),
                        ScalarField(u_d.height, u_d.width, u_d.spacing_mm)};
  ScalarField num(u_d.height, u_d.width, u_d.spacing_mm);

  for (int s : cfg.laplacian_scales) {
    const double h_m = s * u_d.spacing_mm * 1e-3;
    const double inv_h2 = 1.0 / (h_m * h_m);
    for (int r = s; r < u_d.height - s; ++r) {
      for (int c = s; c < u_d.width - s; ++c) {
        const std::complex<double> center = u_d.at(r, c);
        const double amp = std::abs(center);
        if (amp < floor || amp == 0.0) continue;
        const std::complex<double> lap =
            (u_d.at(r - s, c) + u_d.at(r + s, c) + u_d.at(r, c - s) + u_d.at(r, c + s) -
             4.0 * center) * inv_h2;
        const double curv = std::abs(lap);
        if (curv <= 0.0) continue;
        const double w = amp * curv;
        num.at(r, c) += w * (rho_w2 * amp / curv);  // = rho w^2 amp^2
        est.weight.at(r, c) += w;
      }
    }
  }
  for (std::size_t i = 0; i < num.values.size(); ++i)
    if (est.weight.values[i] > 0.0) est.mu.values[i] = num.values[i] / est.weight.values[i];
  return est;
}

struct MmdiResult {
  ScalarField mu;        // Pa
  ScalarField validity;  // 1 = direct estimate, 0 = filled from nearest valid pixel
};

/// Full baseline: bandpass, directional split, per-direction inversion,
/// weight-averaged combination, nearest-valid fill for dead pixels.
inline MmdiResult mmdi_invert(const ComplexField& u, const FilterBankConfig& fcfg,
                              const InversionConfig& icfg) {
  const ComplexField filtered = bandpass(u, fcfg);
  const auto parts = directional_split(filtered, fcfg);

  ScalarField num(u.height, u.width, u.spacing_mm);
  ScalarField den(u.height, u.width, u.spacing_mm);
  for (const auto& part : parts) {
    const DirectionEstimate est = invert_direction(part, icfg);
    for (std::size_t i = 0; i < num.values.size(); ++i) {
      num.values[i] += est.weight.values[i] * est.mu.values[i];
      den.values[i] += est.weight.values[i];
    }
  }

  MmdiResult result{ScalarField(u.height, u.width, u.spacing_mm),
                    ScalarField(u.height, u.width, u.spacing_mm)};
  std::deque<std::pair<int, int>> frontier;
  int valid_count = 0;
  for (int r = 0; r < u.height; ++r) {
    for (int c = 0; c < u.width; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * u.width + c;
      if (den.values[i] > 0.0) {
        result.mu.values[i] = num.values[i] / den.values[i];
        result.validity.values[i] = 1.0;
        frontier.emplace_back(r, c);
        ++valid_count;
      }
    }
  }
  if (valid_count == 0) throw std::runtime_error("MMDI produced no valid pixels");

  // Multi-source BFS fill: each invalid pixel takes the value of its nearest
  // (in hops) valid neighbour.
  std::vector<char> seen(u.size(), 0);
  for (const auto& [r, c] : frontier) seen[static_cast<std::size_t>(r) * u.width + c] = 1;
  while (!frontier.empty()) {
    const auto [r, c] = frontier.front();
    frontier.pop_front();
    const std::size_t i = static_cast<std::size_t>(r) * u.width + c;
    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      const int rr = r + dr[k];
      const int cc = c + dc[k];
      if (rr < 0 || cc < 0 || rr >= u.height || cc >= u.width) continue;
      const std::size_t ii = static_cast<std::size_t>(rr) * u.width + cc;
      if (seen[ii]) continue;
      seen[ii] = 1;
      result.mu.values[ii] = result.mu.values[i];
      frontier.emplace_back(rr, cc);
    }
  }
  return result;
}

}  // namespace elastolab
