#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "elastolab/field.hpp"

namespace elastolab {

// MREG field file:
//   magic "MREG" | version u32 LE | dtype u32 LE | height u32 | width u32 |
//   spacing_mm f32 | row-major payload f32 LE
// dtype 1 = real, dtype 2 = complex (interleaved re,im). Metadata goes to a
// JSON sidecar at <path>.json.
inline constexpr std::uint32_t kMregVersion = 1;
inline constexpr std::uint32_t kMregDtypeReal = 1;
inline constexpr std::uint32_t kMregDtypeComplex = 2;

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  b[0] = static_cast<char>(v & 0xff);
  b[1] = static_cast<char>((v >> 8) & 0xff);
  b[2] = static_cast<char>((v >> 16) & 0xff);
  b[3] = static_cast<char>((v >> 24) & 0xff);
  out.append(b, 4);
}

inline void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

inline std::uint32_t get_u32(const char* p) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(p[0])) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(p[1])) << 8) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(p[2])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(p[3])) << 24);
}

inline float get_f32(const char* p) {
  std::uint32_t bits = get_u32(p);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

inline void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw std::runtime_error("write failed: " + path);
}

inline std::string read_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return bytes;
}

inline std::string header_bytes(std::uint32_t dtype, int height, int width, double spacing) {
  std::string out;
  out.append("MREG", 4);
  put_u32(out, kMregVersion);
  put_u32(out, dtype);
  put_u32(out, static_cast<std::uint32_t>(height));
  put_u32(out, static_cast<std::uint32_t>(width));
  put_f32(out, static_cast<float>(spacing));
  return out;
}

inline nlohmann::json sidecar_json(const FieldMetadata& meta) {
  nlohmann::json j;
  j["frequency_hz"] = meta.frequency_hz;
  j["density_kg_m3"] = meta.density_kg_m3;
  j["phantom_class"] = to_string(meta.phantom_class);
  j["seed"] = meta.seed;
  return j;
}

inline void write_sidecar(const std::string& path, const FieldMetadata& meta,
                          const nlohmann::json& extra) {
  nlohmann::json j = sidecar_json(meta);
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  write_bytes(path + ".json", j.dump(2) + "\n");
}

}  // namespace detail

inline void write_field(const ScalarField& field, const FieldMetadata& meta,
                        const std::string& path, const nlohmann::json& extra = {}) {
  check_field(field);
  meta.validate();
  std::string bytes = detail::header_bytes(kMregDtypeReal, field.height, field.width, field.spacing_mm);
  bytes.reserve(bytes.size() + field.size() * 4);
  for (double v : field.values) detail::put_f32(bytes, static_cast<float>(v));
  detail::write_bytes(path, bytes);
  detail::write_sidecar(path, meta, extra);
}

inline void write_field(const ComplexField& field, const FieldMetadata& meta,
                        const std::string& path, const nlohmann::json& extra = {}) {
  check_field(field);
  meta.validate();
  std::string bytes = detail::header_bytes(kMregDtypeComplex, field.height, field.width, field.spacing_mm);
  bytes.reserve(bytes.size() + field.size() * 8);
  for (const auto& v : field.values) {
    detail::put_f32(bytes, static_cast<float>(v.real()));
    detail::put_f32(bytes, static_cast<float>(v.imag()));
  }
  detail::write_bytes(path, bytes);
  detail::write_sidecar(path, meta, extra);
}

inline FieldMetadata read_sidecar(const std::string& path) {
  FieldMetadata meta;
  const std::string sidecar = path + ".json";
  if (!std::filesystem::exists(sidecar)) return meta;
  nlohmann::json j = nlohmann::json::parse(detail::read_bytes(sidecar));
  meta.frequency_hz = j.value("frequency_hz", meta.frequency_hz);
  meta.density_kg_m3 = j.value("density_kg_m3", meta.density_kg_m3);
  if (j.contains("phantom_class"))
    meta.phantom_class = phantom_class_from_string(j["phantom_class"].get<std::string>());
  meta.seed = j.value("seed", meta.seed);
  return meta;
}

struct MregHeader {
  std::uint32_t dtype = 0;
  int height = 0;
  int width = 0;
  double spacing_mm = 0.0;
  std::size_t payload_offset = 24;
};

inline MregHeader read_mreg_header(const std::string& bytes, const std::string& path) {
  if (bytes.size() < 24) throw std::runtime_error("MREG file truncated: " + path);
  if (std::memcmp(bytes.data(), "MREG", 4) != 0)
    throw std::runtime_error("bad MREG magic: " + path);
  const std::uint32_t version = detail::get_u32(bytes.data() + 4);
  if (version != kMregVersion)
    throw std::runtime_error("unsupported MREG version " + std::to_string(version) + ": " + path);
  MregHeader h;
  h.dtype = detail::get_u32(bytes.data() + 8);
  h.height = static_cast<int>(detail::get_u32(bytes.data() + 12));
  h.width = static_cast<int>(detail::get_u32(bytes.data() + 16));
  h.spacing_mm = detail::get_f32(bytes.data() + 20);
  if (h.dtype != kMregDtypeReal && h.dtype != kMregDtypeComplex)
    throw std::runtime_error("unsupported MREG dtype " + std::to_string(h.dtype) + ": " + path);
  if (h.height <= 0 || h.width <= 0 || !(h.spacing_mm > 0.0))
    throw std::runtime_error("invalid MREG header: " + path);
  const std::size_t scalars = static_cast<std::size_t>(h.height) * h.width *
                              (h.dtype == kMregDtypeComplex ? 2 : 1);
  if (bytes.size() != h.payload_offset + scalars * 4)
    throw std::runtime_error("MREG payload size mismatch: " + path);
  return h;
}

inline std::pair<ScalarField, FieldMetadata> read_scalar_field(const std::string& path) {
  const std::string bytes = detail::read_bytes(path);
  const MregHeader h = read_mreg_header(bytes, path);
  if (h.dtype != kMregDtypeReal) throw std::runtime_error("expected real field: " + path);
  ScalarField f(h.height, h.width, h.spacing_mm);
  const char* p = bytes.data() + h.payload_offset;
  for (auto& v : f.values) {
    v = detail::get_f32(p);
    p += 4;
  }
  return {std::move(f), read_sidecar(path)};
}

inline std::pair<ComplexField, FieldMetadata> read_complex_field(const std::string& path) {
  const std::string bytes = detail::read_bytes(path);
  const MregHeader h = read_mreg_header(bytes, path);
  if (h.dtype != kMregDtypeComplex) throw std::runtime_error("expected complex field: " + path);
  ComplexField f(h.height, h.width, h.spacing_mm);
  const char* p = bytes.data() + h.payload_offset;
  for (auto& v : f.values) {
    v = {detail::get_f32(p), detail::get_f32(p + 4)};
    p += 8;
  }
  return {std::move(f), read_sidecar(path)};
}

}  // namespace elastolab
