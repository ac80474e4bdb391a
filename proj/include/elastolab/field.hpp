#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace elastolab {

enum class PhantomClass {
  kHomogeneous,
  kLinearGradient,
  kFourRandomInclusions,
  kTwoRandomInclusions,
  kFourFixedInclusions,
};

inline const char* to_string(PhantomClass c) {
  switch (c) {
    case PhantomClass::kHomogeneous: return "homogeneous";
    case PhantomClass::kLinearGradient: return "linear_gradient";
    case PhantomClass::kFourRandomInclusions: return "four_random_inclusions";
    case PhantomClass::kTwoRandomInclusions: return "two_random_inclusions";
    case PhantomClass::kFourFixedInclusions: return "four_fixed_inclusions";
  }
  throw std::invalid_argument("unknown phantom class");
}

inline PhantomClass phantom_class_from_string(const std::string& s) {
  if (s == "homogeneous") return PhantomClass::kHomogeneous;
  if (s == "linear_gradient") return PhantomClass::kLinearGradient;
  if (s == "four_random_inclusions") return PhantomClass::kFourRandomInclusions;
  if (s == "two_random_inclusions") return PhantomClass::kTwoRandomInclusions;
  if (s == "four_fixed_inclusions") return PhantomClass::kFourFixedInclusions;
  throw std::invalid_argument("unknown phantom class: " + s);
}

/// Acquisition/simulation context attached to a stored field.
struct FieldMetadata {
  double frequency_hz = 60.0;
  double density_kg_m3 = 1000.0;
  PhantomClass phantom_class = PhantomClass::kHomogeneous;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(frequency_hz > 0.0)) throw std::invalid_argument("frequency must be > 0");
    if (!(density_kg_m3 > 0.0)) throw std::invalid_argument("density must be > 0");
  }
};

// 2D regular grid with square pixels. Values are row-major, index (row, col);
// row r sits at y = r * spacing_mm, col c at x = c * spacing_mm.
template <typename T>
struct Grid2 {
  int height = 0;
  int width = 0;
  double spacing_mm = 1.0;
  std::vector<T> values;

  Grid2() = default;
  Grid2(int h, int w, double spacing, T fill = T{})
      : height(h), width(w), spacing_mm(spacing), values(static_cast<std::size_t>(h) * w, fill) {
    if (h <= 0 || w <= 0) throw std::invalid_argument("grid dims must be positive");
    if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be > 0");
  }

  T& at(int r, int c) { return values[static_cast<std::size_t>(r) * width + c]; }
  const T& at(int r, int c) const { return values[static_cast<std::size_t>(r) * width + c]; }
  std::size_t size() const { return values.size(); }
  bool same_shape(const Grid2& o) const {
    return height == o.height && width == o.width && spacing_mm == o.spacing_mm;
  }
};

using ScalarField = Grid2<double>;
using ComplexField = Grid2<std::complex<double>>;

inline bool all_finite(const ScalarField& f) {
  for (double v : f.values)
    if (!std::isfinite(v)) return false;
  return true;
}

inline bool all_finite(const ComplexField& f) {
  for (const auto& v : f.values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

template <typename T>
void check_field(const Grid2<T>& f) {
  if (f.height <= 0 || f.width <= 0) throw std::invalid_argument("field dims must be positive");
  if (!(f.spacing_mm > 0.0)) throw std::invalid_argument("field spacing must be > 0");
  if (f.values.size() != static_cast<std::size_t>(f.height) * f.width)
    throw std::invalid_argument("field value count does not match dims");
  if (!all_finite(f)) throw std::invalid_argument("field contains non-finite values");
}

}  // namespace elastolab
