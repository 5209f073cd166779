#pragma once

#include <stdexcept>
#include <vector>

#include "gwla/ops.hpp"
#include "gwla/tensor.hpp"

namespace gwla {

/// Discounted returns R_t = r_t + gamma * R_{t+1}, seeded by the bootstrap
/// value after the last step (0 for terminal trajectories).
template <typename S>
std::vector<S> compute_returns(const std::vector<S>& rewards, S bootstrap, S gamma) {
  if (rewards.empty()) throw std::invalid_argument("compute_returns: empty reward list");
  std::vector<S> returns(rewards.size());
  S acc = bootstrap;
  for (size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    returns[i] = acc;
  }
  return returns;
}

struct A3cLoss {
  double policy = 0;
  double value = 0;    // 0.5 * sum (R - V)^2
  double entropy = 0;  // sum of per-step policy entropies
  double entropy_term(double beta) const { return -beta * entropy; }
  double total(double beta) const { return policy + 0.5 * value + entropy_term(beta); }
};

/// Loss components and per-step head gradients for one unroll. The advantage
/// is a constant inside the policy term (no gradient through the baseline);
/// value loss carries an extra 0.5 weight in the total, giving
/// d(total)/dV_t = 0.5*(V_t - R_t). Entropy is an additive bonus with
/// weight beta, so d(total)/dlogits also includes -beta * dH/dlogits.
template <typename S>
A3cLoss a3c_grads(const std::vector<TensorT<S>>& probs, const std::vector<int>& actions,
                  const std::vector<S>& values, const std::vector<S>& returns, double beta,
                  std::vector<TensorT<S>>* dlogits_out, std::vector<S>* dvalue_out) {
  const size_t n = probs.size();
  if (actions.size() != n || values.size() != n || returns.size() != n)
    throw std::invalid_argument("a3c_grads: per-step list lengths differ");
  A3cLoss loss;
  if (dlogits_out) dlogits_out->resize(n);
  if (dvalue_out) dvalue_out->resize(n);
  for (size_t t = 0; t < n; ++t) {
    const TensorT<S>& p = probs[t];
    int a = actions[t];
    if (a < 0 || a >= p.numel())
      throw std::invalid_argument("a3c_grads: action index out of range");
    double adv = static_cast<double>(returns[t]) - static_cast<double>(values[t]);
    double logp =
        std::log(std::max(static_cast<double>(p[static_cast<size_t>(a)]), 1e-12));
    loss.policy += -logp * adv;
    double diff = static_cast<double>(returns[t]) - static_cast<double>(values[t]);
    loss.value += 0.5 * diff * diff;
    loss.entropy += static_cast<double>(entropy(p));
    if (dlogits_out) {
      TensorT<S> d = p;  // adv * (p - onehot(a))
      d[static_cast<size_t>(a)] -= S(1);
      for (S& v : d.data) v *= static_cast<S>(adv);
      TensorT<S> dent = entropy_grad_logits(p);
      for (size_t j = 0; j < d.data.size(); ++j)
        d.data[j] -= static_cast<S>(beta) * dent.data[j];
      (*dlogits_out)[t] = std::move(d);
    }
    if (dvalue_out) (*dvalue_out)[t] = static_cast<S>(0.5 * (values[t] - returns[t]));
  }
  return loss;
}

}  // namespace gwla
