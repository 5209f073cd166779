#pragma once

#include <cmath>
#include <cstdint>

namespace gwla {

/// Counter-based pseudorandom stream (splitmix64). The draw sequence depends
/// only on (seed, counter), so replays are identical on every platform —
/// unlike std:: distributions, whose output is implementation-defined.
class RngStream {
 public:
  explicit RngStream(uint64_t seed = 0) : seed_(seed), counter_(0) {}

  uint64_t seed() const { return seed_; }
  uint64_t counter() const { return counter_; }

  uint64_t next_u64() {
    uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform in log-space on [lo, hi], lo > 0.
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  /// Integer in [0, n). n must be positive.
  int uniform_int(int n) {
    return static_cast<int>((static_cast<unsigned __int128>(next_u64()) *
                             static_cast<unsigned __int128>(n)) >> 64);
  }

  /// Standard normal via Box-Muller; two draws per sample, no cached state.
  double normal() {
    double u1 = 1.0 - uniform();  // (0,1], keeps log finite
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Derive an independent stream, e.g. one per worker.
  RngStream split(uint64_t stream_id) const {
    uint64_t z = seed_ ^ (0xD1B54A32D192ED03ULL + stream_id * 0x2545F4914F6CDD1DULL);
    z = (z ^ (z >> 33)) * 0xFF51AFD7ED558CCDULL;
    z = (z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53ULL;
    return RngStream(z ^ (z >> 33));
  }

 private:
  uint64_t seed_;
  uint64_t counter_;
};

}  // namespace gwla
