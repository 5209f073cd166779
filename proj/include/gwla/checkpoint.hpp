#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwla/param_store.hpp"

namespace gwla {

/// Binary checkpoint layout, little-endian throughout:
///   magic "GWLA" | u32 version | u32 block_count
///   per block: u32 name_len | name bytes | u32 rank | u32 dims[rank] | f32 payload
/// Metadata entries are stored as ordinary 1-element blocks named "meta.<key>".
inline constexpr uint32_t kCheckpointVersion = 1;

namespace detail {

inline void write_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

inline void write_f32(std::ostream& os, const float* data, size_t n) {
  // Host is little-endian x86; bytes are written verbatim for bit-exact
  // round trips.
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * 4));
}

inline void read_f32(std::istream& is, float* data, size_t n) {
  is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * 4));
  if (!is) throw std::runtime_error("checkpoint: truncated payload");
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const ParamStore& params,
                            const std::map<std::string, float>& meta = {}) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open for write: " + path);
  os.write("GWLA", 4);
  detail::write_u32(os, kCheckpointVersion);
  detail::write_u32(os, static_cast<uint32_t>(params.blocks.size() + meta.size()));
  auto write_block = [&os](const std::string& name, const std::vector<int>& shape,
                           const float* data, size_t n) {
    detail::write_u32(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::write_u32(os, static_cast<uint32_t>(shape.size()));
    for (int d : shape) detail::write_u32(os, static_cast<uint32_t>(d));
    detail::write_f32(os, data, n);
  };
  for (const auto& b : params.blocks)
    write_block(b.name, b.value.shape, b.value.data.data(), b.value.data.size());
  for (const auto& [key, val] : meta) write_block("meta." + key, {1}, &val, 1);
  if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

/// Loads values into a store with matching layout; "meta.*" blocks are
/// returned separately. Wrong magic or unsupported version is rejected.
inline std::map<std::string, float> load_checkpoint(const std::string& path, ParamStore& params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open for read: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "GWLA", 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  uint32_t version = detail::read_u32(is);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  uint32_t count = detail::read_u32(is);
  std::map<std::string, float> meta;
  size_t loaded = 0;
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t name_len = detail::read_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (!is) throw std::runtime_error("checkpoint: truncated name");
    uint32_t rank = detail::read_u32(is);
    std::vector<int> shape(rank);
    size_t n = 1;
    for (uint32_t r = 0; r < rank; ++r) {
      shape[r] = static_cast<int>(detail::read_u32(is));
      n *= static_cast<size_t>(shape[r]);
    }
    if (name.rfind("meta.", 0) == 0) {
      if (n != 1) throw std::runtime_error("checkpoint: meta block must hold one value: " + name);
      float v;
      detail::read_f32(is, &v, 1);
      meta[name.substr(5)] = v;
      continue;
    }
    if (!params.has(name)) throw std::runtime_error("checkpoint: unknown block: " + name);
    auto& blk = params.block(name);
    if (blk.value.shape != shape)
      throw std::runtime_error("checkpoint: shape mismatch for " + name + ": file " +
                               shape_to_string(shape) + " vs store " + blk.value.shape_str());
    detail::read_f32(is, blk.value.data.data(), n);
    ++loaded;
  }
  if (loaded != params.blocks.size())
    throw std::runtime_error("checkpoint: file lacks " +
                             std::to_string(params.blocks.size() - loaded) + " block(s)");
  return meta;
}

}  // namespace gwla
