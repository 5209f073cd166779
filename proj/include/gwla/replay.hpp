#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "gwla/rng.hpp"
#include "gwla/tensor.hpp"

namespace gwla {

/// Reward-sign labels for the prediction task.
enum class RewardSign : int { Negative = 0, Zero = 1, Positive = 2 };
inline constexpr int kNumRewardSigns = 3;

inline RewardSign reward_sign(double reward) {
  if (reward > 0) return RewardSign::Positive;
  if (reward < 0) return RewardSign::Negative;
  return RewardSign::Zero;
}

/// Final observations of one episode, quantized to 8 bits per channel to
/// bound buffer memory. Fewer than 4 decisions repeat the earliest frame.
struct ReplayEntry {
  static constexpr int kObservations = 4;
  std::vector<uint8_t> frames;  // 4 * 3 * side * side
  int side = 0;
  int word_id = 0;
  RewardSign label = RewardSign::Zero;

  static ReplayEntry from_frames(const std::vector<Tensor>& last_frames, int word_id,
                                 double episode_reward) {
    if (last_frames.empty()) throw std::invalid_argument("ReplayEntry: no frames");
    ReplayEntry e;
    e.side = last_frames.back().dim(1);
    e.word_id = word_id;
    e.label = reward_sign(episode_reward);
    const size_t per = last_frames.back().data.size();
    e.frames.resize(kObservations * per);
    for (int o = 0; o < kObservations; ++o) {
      // repeat-pad from the front: [f0,f0,f0,f1] for a 2-frame episode etc.
      int src_idx = static_cast<int>(last_frames.size()) - kObservations + o;
      if (src_idx < 0) src_idx = 0;
      const Tensor& f = last_frames[static_cast<size_t>(src_idx)];
      for (size_t i = 0; i < per; ++i) {
        float v = f.data[i];
        v = v < 0 ? 0 : (v > 1 ? 1 : v);
        e.frames[static_cast<size_t>(o) * per + i] = static_cast<uint8_t>(v * 255.0f + 0.5f);
      }
    }
    return e;
  }

  std::vector<Tensor> decode() const {
    const size_t per = frames.size() / kObservations;
    std::vector<Tensor> out(kObservations);
    for (int o = 0; o < kObservations; ++o) {
      out[o] = Tensor({3, side, side});
      for (size_t i = 0; i < per; ++i)
        out[o].data[i] = frames[static_cast<size_t>(o) * per + i] * (1.0f / 255.0f);
    }
    return out;
  }
};

/// Bounded shared store of episode-final observations. Eviction is
/// oldest-first regardless of label; sampling balances the three labels by
/// first picking uniformly among the nonempty label sets.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity = 2048) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: zero capacity");
  }

  size_t capacity() const { return capacity_; }

  size_t size() const {
    std::lock_guard<std::mutex> lk(mu_);
    return entries_.size();
  }

  std::array<size_t, kNumRewardSigns> label_counts() const {
    std::lock_guard<std::mutex> lk(mu_);
    std::array<size_t, kNumRewardSigns> c = {0, 0, 0};
    for (const auto& e : entries_) ++c[static_cast<int>(e.label)];
    return c;
  }

  void push(ReplayEntry entry) {
    std::lock_guard<std::mutex> lk(mu_);
    entries_.push_back(std::move(entry));
    if (entries_.size() > capacity_) entries_.pop_front();
  }

  /// One balanced draw; false when empty.
  bool sample(RngStream& rng, ReplayEntry& out) const {
    std::lock_guard<std::mutex> lk(mu_);
    if (entries_.empty()) return false;
    std::array<std::vector<size_t>, kNumRewardSigns> by_label;
    for (size_t i = 0; i < entries_.size(); ++i)
      by_label[static_cast<int>(entries_[i].label)].push_back(i);
    std::vector<int> nonempty;
    for (int l = 0; l < kNumRewardSigns; ++l)
      if (!by_label[l].empty()) nonempty.push_back(l);
    int label = nonempty[static_cast<size_t>(rng.uniform_int(static_cast<int>(nonempty.size())))];
    const auto& pool = by_label[label];
    out = entries_[pool[static_cast<size_t>(rng.uniform_int(static_cast<int>(pool.size())))]];
    return true;
  }

 private:
  size_t capacity_;
  mutable std::mutex mu_;
  std::deque<ReplayEntry> entries_;
};

}  // namespace gwla
