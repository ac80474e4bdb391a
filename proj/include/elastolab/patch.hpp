#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "elastolab/field.hpp"
#include "elastolab/field_io.hpp"

namespace elastolab {

// One training/inference patch: two input channels (Re u, Im u) and an
// optional stiffness target (Pa), plus its origin in the source field.
struct Patch {
  int height = 0;
  int width = 0;
  int origin_row = 0;
  int origin_col = 0;
  std::uint32_t source_id = 0;
  std::vector<double> input;                  // 2*h*w, channel-major
  std::optional<std::vector<double>> target;  // h*w
};

struct PatchSet {
  int patch_size = 0;
  int stride = 0;
  double spacing_mm = 1.0;
  double exclusion_threshold = 0.5;
  bool has_targets = false;
  std::vector<Patch> patches;
};

namespace detail {

inline std::vector<int> tiling_origins(int extent, int size, int stride, bool clamp_last) {
  if (size <= 0 || stride <= 0) throw std::invalid_argument("patch size and stride must be >= 1");
  if (extent < size) throw std::invalid_argument("field smaller than patch size");
  std::vector<int> origins;
  for (int o = 0; o + size <= extent; o += stride) origins.push_back(o);
  if (clamp_last && origins.back() != extent - size) origins.push_back(extent - size);
  return origins;
}

inline Patch cut_patch(const ComplexField& u, const ScalarField* mu, int r0, int c0, int size,
                       std::uint32_t source_id) {
  Patch p;
  p.height = size;
  p.width = size;
  p.origin_row = r0;
  p.origin_col = c0;
  p.source_id = source_id;
  p.input.resize(static_cast<std::size_t>(2) * size * size);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const auto v = u.at(r0 + r, c0 + c);
      p.input[static_cast<std::size_t>(r) * size + c] = v.real();
      p.input[static_cast<std::size_t>(size) * size + r * size + c] = v.imag();
    }
  }
  if (mu) {
    std::vector<double> t(static_cast<std::size_t>(size) * size);
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c)
        t[static_cast<std::size_t>(r) * size + c] = mu->at(r0 + r, c0 + c);
    p.target = std::move(t);
  }
  return p;
}

}  // namespace detail

// Training extraction: regular tiling, row-major by origin. Patches whose
// target has fewer than `threshold` fraction of nonzero pixels are dropped
// (exactly at the threshold is kept).
inline PatchSet extract_training(const ComplexField& u, const ScalarField& mu, int size = 30,
                                 int stride = 30, double threshold = 0.5,
                                 std::uint32_t source_id = 0) {
  if (u.height != mu.height || u.width != mu.width || u.spacing_mm != mu.spacing_mm)
    throw std::invalid_argument("displacement/stiffness fields must share shape and spacing");
  PatchSet set;
  set.patch_size = size;
  set.stride = stride;
  set.spacing_mm = u.spacing_mm;
  set.exclusion_threshold = threshold;
  set.has_targets = true;
  const auto rows = detail::tiling_origins(u.height, size, stride, false);
  const auto cols = detail::tiling_origins(u.width, size, stride, false);
  for (int r0 : rows) {
    for (int c0 : cols) {
      Patch p = detail::cut_patch(u, &mu, r0, c0, size, source_id);
      int nonzero = 0;
      for (double v : *p.target) nonzero += v != 0.0;
      if (static_cast<double>(nonzero) < threshold * static_cast<double>(p.target->size())) continue;
      set.patches.push_back(std::move(p));
    }
  }
  return set;
}

/// Inference tiling at the given stride, with the last row/col origin
/// clamped so coverage reaches the field edge.
inline PatchSet extract_inference(const ComplexField& u, int size = 20, int stride = 3) {
  PatchSet set;
  set.patch_size = size;
  set.stride = stride;
  set.spacing_mm = u.spacing_mm;
  set.has_targets = false;
  const auto rows = detail::tiling_origins(u.height, size, stride, true);
  const auto cols = detail::tiling_origins(u.width, size, stride, true);
  for (int r0 : rows)
    for (int c0 : cols) set.patches.push_back(detail::cut_patch(u, nullptr, r0, c0, size, 0));
  return set;
}

struct Prediction {
  int origin_row = 0;
  int origin_col = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;
};

struct AggregateResult {
  ScalarField map;
  ScalarField coverage;  // number of patches covering each pixel
};

/// Per-pixel mean of all covering predictions; coverage 0 marks pixels no
/// patch touched.
inline AggregateResult aggregate(const std::vector<Prediction>& predictions, int out_height,
                                 int out_width, double spacing_mm = 1.0) {
  if (predictions.empty()) throw std::invalid_argument("no predictions to aggregate");
  AggregateResult out{ScalarField(out_height, out_width, spacing_mm),
                      ScalarField(out_height, out_width, spacing_mm)};
  for (const auto& p : predictions) {
    if (p.origin_row < 0 || p.origin_col < 0 || p.origin_row + p.height > out_height ||
        p.origin_col + p.width > out_width)
      throw std::invalid_argument("prediction outside output shape");
    if (p.values.size() != static_cast<std::size_t>(p.height) * p.width)
      throw std::invalid_argument("prediction payload size mismatch");
    for (int r = 0; r < p.height; ++r) {
      for (int c = 0; c < p.width; ++c) {
        out.map.at(p.origin_row + r, p.origin_col + c) += p.values[static_cast<std::size_t>(r) * p.width + c];
        out.coverage.at(p.origin_row + r, p.origin_col + c) += 1.0;
      }
    }
  }
  for (std::size_t i = 0; i < out.map.values.size(); ++i)
    if (out.coverage.values[i] > 0.0) out.map.values[i] /= out.coverage.values[i];
  return out;
}

// PatchSet container: magic "MRPS" | version u32 | has_targets u32 |
// count u32 | size u32 | stride u32 | spacing f32 | threshold f32 | records.
// Record: source_id u32, origin row/col i32, input f32 x 2*s*s, target
// f32 x s*s when present.
inline void write_patchset(const PatchSet& set, const std::string& path) {
  std::string bytes;
  bytes.append("MRPS", 4);
  detail::put_u32(bytes, 1);
  detail::put_u32(bytes, set.has_targets ? 1 : 0);
  detail::put_u32(bytes, static_cast<std::uint32_t>(set.patches.size()));
  detail::put_u32(bytes, static_cast<std::uint32_t>(set.patch_size));
  detail::put_u32(bytes, static_cast<std::uint32_t>(set.stride));
  detail::put_f32(bytes, static_cast<float>(set.spacing_mm));
  detail::put_f32(bytes, static_cast<float>(set.exclusion_threshold));
  for (const auto& p : set.patches) {
    if (p.height != set.patch_size || p.width != set.patch_size)
      throw std::invalid_argument("patch size mismatch in set");
    if (set.has_targets != p.target.has_value())
      throw std::invalid_argument("mixed target presence in set");
    detail::put_u32(bytes, p.source_id);
    detail::put_u32(bytes, static_cast<std::uint32_t>(p.origin_row));
    detail::put_u32(bytes, static_cast<std::uint32_t>(p.origin_col));
    for (double v : p.input) detail::put_f32(bytes, static_cast<float>(v));
    if (p.target)
      for (double v : *p.target) detail::put_f32(bytes, static_cast<float>(v));
  }
  detail::write_bytes(path, bytes);
}

inline PatchSet read_patchset(const std::string& path) {
  const std::string bytes = detail::read_bytes(path);
  if (bytes.size() < 28 || std::memcmp(bytes.data(), "MRPS", 4) != 0)
    throw std::runtime_error("bad patchset file: " + path);
  if (detail::get_u32(bytes.data() + 4) != 1)
    throw std::runtime_error("unsupported patchset version: " + path);
  PatchSet set;
  set.has_targets = detail::get_u32(bytes.data() + 8) != 0;
  const std::uint32_t count = detail::get_u32(bytes.data() + 12);
  set.patch_size = static_cast<int>(detail::get_u32(bytes.data() + 16));
  set.stride = static_cast<int>(detail::get_u32(bytes.data() + 20));
  set.spacing_mm = detail::get_f32(bytes.data() + 24);
  set.exclusion_threshold = detail::get_f32(bytes.data() + 28);

  const std::size_t s2 = static_cast<std::size_t>(set.patch_size) * set.patch_size;
  const std::size_t record = 12 + 4 * (2 * s2 + (set.has_targets ? s2 : 0));
  std::size_t offset = 32;
  if (bytes.size() != offset + count * record)
    throw std::runtime_error("patchset payload size mismatch: " + path);
  set.patches.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    const char* p = bytes.data() + offset + k * record;
    Patch patch;
    patch.height = set.patch_size;
    patch.width = set.patch_size;
    patch.source_id = detail::get_u32(p);
    patch.origin_row = static_cast<int>(detail::get_u32(p + 4));
    patch.origin_col = static_cast<int>(detail::get_u32(p + 8));
    p += 12;
    patch.input.resize(2 * s2);
    for (auto& v : patch.input) {
      v = detail::get_f32(p);
      p += 4;
    }
    if (set.has_targets) {
      std::vector<double> t(s2);
      for (auto& v : t) {
        v = detail::get_f32(p);
        p += 4;
      }
      patch.target = std::move(t);
    }
    set.patches.push_back(std::move(patch));
  }
  return set;
}

}  // namespace elastolab
