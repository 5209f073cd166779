#pragma once

#include <cmath>

#include "gwla/param_store.hpp"

namespace gwla {

struct RmsPropConfig {
  float lr = 1e-3f;
  float decay = 0.99f;
  float eps = 0.1f;
};

/// Single-threaded RMSProp step using the store's own second-moment
/// accumulators; gradient buffers are consumed (zeroed).
template <typename S>
void rmsprop_update(ParamStoreT<S>& params, S lr, S decay = S(0.99), S eps = S(0.1)) {
  for (auto& b : params.blocks) {
    auto& val = b.value.data;
    auto& g = b.grad.data;
    auto& m = b.ms.data;
    for (size_t j = 0; j < val.size(); ++j) {
      m[j] = decay * m[j] + (S(1) - decay) * g[j] * g[j];
      val[j] -= lr * g[j] / std::sqrt(m[j] + eps);
      g[j] = S(0);
    }
  }
}

template <typename S>
void scale_grads(ParamStoreT<S>& params, S factor) {
  for (auto& b : params.blocks)
    for (S& g : b.grad.data) g *= factor;
}

/// Rescales all gradients so the global L2 norm is at most `limit`.
/// Returns the pre-clip norm. Applying twice changes nothing the second
/// time, since a clipped store is already within the limit.
template <typename S>
double clip_global_norm(ParamStoreT<S>& params, double limit) {
  double norm = params.global_grad_norm();
  if (norm > limit && norm > 0) {
    S factor = static_cast<S>(limit / norm);
    scale_grads(params, factor);
  }
  return norm;
}

/// Linear anneal from `initial` at step 0 to 0 at `total_steps`.
inline float lr_schedule(float initial, long long step, long long total_steps) {
  if (total_steps <= 0) return initial;
  if (step >= total_steps) return 0.0f;
  double frac = 1.0 - static_cast<double>(step) / static_cast<double>(total_steps);
  return static_cast<float>(initial * frac);
}

}  // namespace gwla
