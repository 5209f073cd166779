#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwla/tensor.hpp"

namespace gwla {

/// Named parameter blocks with paired gradient and RMSProp second-moment
/// buffers. Iteration order is the registration order, so serialization and
/// hashing are deterministic.
template <typename S>
struct ParamStoreT {
  struct Block {
    std::string name;
    TensorT<S> value;
    TensorT<S> grad;
    TensorT<S> ms;
  };

  std::vector<Block> blocks;
  std::map<std::string, size_t> index;

  TensorT<S>& add(const std::string& name, TensorT<S> value) {
    if (index.count(name)) throw std::invalid_argument("param block already registered: " + name);
    index[name] = blocks.size();
    blocks.push_back({name, std::move(value), {}, {}});
    Block& b = blocks.back();
    b.grad = TensorT<S>(b.value.shape);
    b.ms = TensorT<S>(b.value.shape);
    return b.value;
  }

  bool has(const std::string& name) const { return index.count(name) != 0; }

  Block& block(const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw std::invalid_argument("unknown param block: " + name);
    return blocks[it->second];
  }
  const Block& block(const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) throw std::invalid_argument("unknown param block: " + name);
    return blocks[it->second];
  }

  TensorT<S>& value(const std::string& name) { return block(name).value; }
  const TensorT<S>& value(const std::string& name) const { return block(name).value; }
  TensorT<S>& grad(const std::string& name) { return block(name).grad; }

  void zero_grads() {
    for (Block& b : blocks) b.grad.zero();
  }

  size_t total_params() const {
    size_t n = 0;
    for (const Block& b : blocks) n += b.value.data.size();
    return n;
  }

  /// Copies values from a store with identical block layout.
  template <typename S2>
  void copy_values_from(const ParamStoreT<S2>& other) {
    if (other.blocks.size() != blocks.size())
      throw std::invalid_argument("copy_values_from: block count mismatch");
    for (size_t i = 0; i < blocks.size(); ++i) {
      const auto& src = other.blocks[i];
      if (src.name != blocks[i].name || src.value.shape != blocks[i].value.shape)
        throw std::invalid_argument("copy_values_from: layout mismatch at block " + blocks[i].name);
      for (size_t j = 0; j < src.value.data.size(); ++j)
        blocks[i].value.data[j] = static_cast<S>(src.value.data[j]);
    }
  }

  /// Same layout, different scalar type; values copied, grads zeroed.
  template <typename S2>
  ParamStoreT<S2> cast() const {
    ParamStoreT<S2> out;
    for (const Block& b : blocks) out.add(b.name, b.value.template cast<S2>());
    return out;
  }

  double global_grad_norm() const {
    double sq = 0;
    for (const Block& b : blocks)
      for (S g : b.grad.data) sq += static_cast<double>(g) * static_cast<double>(g);
    return std::sqrt(sq);
  }
};

using ParamStore = ParamStoreT<float>;
using ParamStoreD = ParamStoreT<double>;

/// FNV-1a over the raw little-endian bytes of every value buffer, in block
/// order. Used to assert that evaluation passes leave parameters untouched.
inline uint64_t value_hash(const ParamStore& store) {
  uint64_t h = 1469598103934665603ull;
  auto feed = [&h](const void* p, size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& b : store.blocks) {
    feed(b.name.data(), b.name.size());
    feed(b.value.data.data(), b.value.data.size() * sizeof(float));
  }
  return h;
}

/// Central parameter server for asynchronous workers. Updates lock one block
/// at a time; readers snapshotting under load may observe values from
/// different update steps (standard lock-free-style asynchrony). Exclusive
/// mode serializes whole-store access for bitwise-reproducible runs.
class SharedParamStore {
 public:
  explicit SharedParamStore(ParamStore initial, bool exclusive = false)
      : store_(std::move(initial)), exclusive_(exclusive) {
    locks_ = std::vector<std::mutex>(store_.blocks.size());
  }

  bool exclusive() const { return exclusive_; }
  size_t num_blocks() const { return store_.blocks.size(); }
  const ParamStore& layout() const { return store_; }

  void snapshot_to(ParamStore& dst) {
    if (exclusive_) {
      std::lock_guard<std::mutex> lk(global_);
      snapshot_unlocked(dst);
    } else {
      for (size_t i = 0; i < store_.blocks.size(); ++i) {
        std::lock_guard<std::mutex> lk(locks_[i]);
        dst.blocks[i].value.data = store_.blocks[i].value.data;
      }
    }
  }

  /// RMSProp with shared second-moment accumulators:
  ///   ms <- decay*ms + (1-decay)*g^2 ; w <- w - lr * g / sqrt(ms + eps)
  void apply_rmsprop(const ParamStore& grads, float lr, float decay, float eps) {
    if (exclusive_) {
      std::lock_guard<std::mutex> lk(global_);
      for (size_t i = 0; i < store_.blocks.size(); ++i) apply_block(i, grads, lr, decay, eps);
    } else {
      for (size_t i = 0; i < store_.blocks.size(); ++i) {
        std::lock_guard<std::mutex> lk(locks_[i]);
        apply_block(i, grads, lr, decay, eps);
      }
    }
  }

  uint64_t hash() {
    std::lock_guard<std::mutex> lk(global_);
    return value_hash(store_);
  }

  /// Whole-store access for checkpointing; callers must not hold block locks.
  ParamStore copy() {
    ParamStore dst = store_;  // layout
    snapshot_to(dst);
    return dst;
  }

  void load(const ParamStore& src) {
    std::lock_guard<std::mutex> lk(global_);
    store_.copy_values_from(src);
    for (auto& b : store_.blocks) b.ms.zero();
  }

 private:
  void snapshot_unlocked(ParamStore& dst) {
    for (size_t i = 0; i < store_.blocks.size(); ++i)
      dst.blocks[i].value.data = store_.blocks[i].value.data;
  }

  void apply_block(size_t i, const ParamStore& grads, float lr, float decay, float eps) {
    auto& val = store_.blocks[i].value.data;
    auto& ms = store_.blocks[i].ms.data;
    const auto& g = grads.blocks[i].grad.data;
    for (size_t j = 0; j < val.size(); ++j) {
      ms[j] = decay * ms[j] + (1.0f - decay) * g[j] * g[j];
      val[j] -= lr * g[j] / std::sqrt(ms[j] + eps);
    }
  }

  ParamStore store_;
  std::vector<std::mutex> locks_;
  std::mutex global_;
  bool exclusive_;
};

}  // namespace gwla
