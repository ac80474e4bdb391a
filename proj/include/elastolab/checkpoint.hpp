#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "elastolab/field_io.hpp"
#include "elastolab/unet.hpp"

namespace elastolab {

// Checkpoint file:
//   magic "DIMC" | version u32 | config JSON (u32 length + bytes) |
//   record count u32 | records (name u32+bytes, rank u32, dims u32 x rank,
//   payload f32 LE)
// Records cover optimized parameters and batch-norm running statistics, in
// the network's deterministic visitation order.
inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void save_checkpoint(UNet<T>& net, const std::string& path, nlohmann::json extra = {}) {
  nlohmann::json cfg;
  cfg["in_channels"] = net.config().in_channels;
  cfg["base_channels"] = net.config().base_channels;
  cfg["leaky_slope"] = net.config().leaky_slope;
  for (auto it = extra.begin(); it != extra.end(); ++it) cfg[it.key()] = it.value();
  const std::string cfg_str = cfg.dump();

  std::string bytes;
  bytes.append("DIMC", 4);
  detail::put_u32(bytes, kCheckpointVersion);
  detail::put_u32(bytes, static_cast<std::uint32_t>(cfg_str.size()));
  bytes.append(cfg_str);

  std::vector<std::pair<std::string, const std::vector<T>*>> records;
  net.visit_params([&](const std::string& name, std::vector<T>& data, std::vector<T>&) {
    records.emplace_back(name, &data);
  });
  net.visit_state([&](const std::string& name, std::vector<T>& data) {
    records.emplace_back(name, &data);
  });

  detail::put_u32(bytes, static_cast<std::uint32_t>(records.size()));
  for (const auto& [name, data] : records) {
    detail::put_u32(bytes, static_cast<std::uint32_t>(name.size()));
    bytes.append(name);
    detail::put_u32(bytes, 1);
    detail::put_u32(bytes, static_cast<std::uint32_t>(data->size()));
    for (T v : *data) detail::put_f32(bytes, static_cast<float>(v));
  }
  detail::write_bytes(path, bytes);
}

struct CheckpointInfo {
  nlohmann::json config;
  std::map<std::string, std::vector<float>> tensors;
};

inline CheckpointInfo read_checkpoint(const std::string& path) {
  const std::string bytes = detail::read_bytes(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "DIMC", 4) != 0)
    throw std::runtime_error("bad checkpoint file: " + path);
  if (detail::get_u32(bytes.data() + 4) != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version: " + path);
  const std::uint32_t cfg_len = detail::get_u32(bytes.data() + 8);
  std::size_t off = 12;
  if (bytes.size() < off + cfg_len + 4) throw std::runtime_error("truncated checkpoint: " + path);
  CheckpointInfo info;
  info.config = nlohmann::json::parse(bytes.substr(off, cfg_len));
  off += cfg_len;
  const std::uint32_t count = detail::get_u32(bytes.data() + off);
  off += 4;
  for (std::uint32_t k = 0; k < count; ++k) {
    if (bytes.size() < off + 4) throw std::runtime_error("truncated checkpoint: " + path);
    const std::uint32_t name_len = detail::get_u32(bytes.data() + off);
    off += 4;
    const std::string name = bytes.substr(off, name_len);
    off += name_len;
    const std::uint32_t rank = detail::get_u32(bytes.data() + off);
    off += 4;
    std::size_t total = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      total *= detail::get_u32(bytes.data() + off);
      off += 4;
    }
    if (bytes.size() < off + total * 4) throw std::runtime_error("truncated checkpoint: " + path);
    std::vector<float> data(total);
    for (auto& v : data) {
      v = detail::get_f32(bytes.data() + off);
      off += 4;
    }
    info.tensors.emplace(name, std::move(data));
  }
  if (off != bytes.size()) throw std::runtime_error("trailing bytes in checkpoint: " + path);
  return info;
}

template <typename T>
UNet<T> load_checkpoint(const std::string& path) {
  const CheckpointInfo info = read_checkpoint(path);
  UNetConfig cfg;
  cfg.in_channels = info.config.value("in_channels", cfg.in_channels);
  cfg.base_channels = info.config.value("base_channels", cfg.base_channels);
  cfg.leaky_slope = info.config.value("leaky_slope", cfg.leaky_slope);
  UNet<T> net(cfg);
  auto fill = [&](const std::string& name, std::vector<T>& data) {
    auto it = info.tensors.find(name);
    if (it == info.tensors.end()) throw std::runtime_error("checkpoint missing tensor: " + name);
    if (it->second.size() != data.size())
      throw std::runtime_error("checkpoint tensor size mismatch: " + name);
    for (std::size_t k = 0; k < data.size(); ++k) data[k] = static_cast<T>(it->second[k]);
  };
  net.visit_params([&](const std::string& name, std::vector<T>& data, std::vector<T>&) { fill(name, data); });
  net.visit_state([&](const std::string& name, std::vector<T>& data) { fill(name, data); });
  return net;
}

}  // namespace elastolab
