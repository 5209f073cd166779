#pragma once

#include <vector>

#include "gwla/a3c.hpp"
#include "gwla/agent.hpp"
#include "gwla/gradcheck.hpp"
#include "gwla/rng.hpp"

namespace gwla {

/// Double-precision finite-difference check of the full network gradient.
/// The loss is a short unroll of the training objective (policy + value +
/// entropy terms with fixed advantages/returns) plus, optionally, the
/// reward-prediction term, all on random frames. `coords_per_block` caps the
/// perturbed coordinates per parameter block (0 = all of them).
inline GradCheckResult agent_gradient_check(Variant variant, uint64_t seed, int frame_side = 44,
                                            int unroll = 2, bool with_aux = true,
                                            int coords_per_block = 6) {
  // A 44px frame shrinks the ladder to sides (10, 4, 2) and keeps the
  // finite-difference loop tractable; every block still gets exercised.
  AgentConfig cfg = AgentConfig::make(variant, 8, frame_side);
  AgentNetT<double> net(cfg);

  RngStream rng(seed);
  ParamStoreD params;
  net.register_params(params, rng, 0.75);

  std::vector<TensorD> frames;
  std::vector<int> words, actions;
  std::vector<double> advantages, returns;
  for (int t = 0; t < unroll; ++t) {
    TensorD f({3, frame_side, frame_side});
    for (auto& v : f.data) v = rng.uniform(0.0, 1.0);
    frames.push_back(std::move(f));
    words.push_back(static_cast<int>(rng.uniform_int(cfg.vocab_size)));
    actions.push_back(static_cast<int>(rng.uniform_int(cfg.num_actions)));
    advantages.push_back(rng.uniform(-2.0, 2.0));
    returns.push_back(rng.uniform(-5.0, 5.0));
  }
  const double beta = 0.01;

  std::vector<TensorD> aux_frames;
  std::vector<int> aux_words;
  int aux_label = 1;
  if (with_aux) {
    int aux_word = static_cast<int>(rng.uniform_int(cfg.vocab_size));
    for (int o = 0; o < 4; ++o) {
      TensorD f({3, frame_side, frame_side});
      for (auto& v : f.data) v = rng.uniform(0.0, 1.0);
      aux_frames.push_back(std::move(f));
      aux_words.push_back(aux_word);
    }
  }

  auto loss_fn = [&](const ParamStoreD& p) {
    double loss = 0;
    LstmStateT<double> state = LstmStateT<double>::zeros(cfg.lstm_width);
    for (int t = 0; t < unroll; ++t) {
      auto fr = net.forward(p, frames[t], words[t], state);
      state = fr.state;
      double logp = std::log(std::max(1e-12, fr.probs[actions[t]]));
      double diff = fr.value - returns[t];
      loss += -logp * advantages[t] + 0.5 * diff * diff - beta * entropy(fr.probs);
    }
    if (with_aux) {
      AuxCacheT<double> cache;
      loss += net.aux_forward(p, aux_frames, aux_words, aux_label, &cache);
    }
    return loss;
  };

  // Analytic pass: replay the unroll with caches, then walk it backwards.
  ParamStoreD analytic;
  net.register_params(analytic, rng, 0.75);
  analytic.copy_values_from(params);
  analytic.zero_grads();
  {
    std::vector<StepCacheT<double>> caches(unroll);
    std::vector<TensorD> probs_seq;
    std::vector<double> values;
    LstmStateT<double> state = LstmStateT<double>::zeros(cfg.lstm_width);
    for (int t = 0; t < unroll; ++t) {
      auto fr = net.forward(analytic, frames[t], words[t], state, &caches[t]);
      state = fr.state;
      probs_seq.push_back(fr.probs);
      values.push_back(fr.value);
    }
    TensorD dh({cfg.lstm_width}), dc({cfg.lstm_width});
    for (int t = unroll - 1; t >= 0; --t) {
      TensorD dlogits({cfg.num_actions});
      TensorD dent = entropy_grad_logits(probs_seq[t]);
      for (int a = 0; a < cfg.num_actions; ++a) {
        double onehot = a == actions[t] ? 1.0 : 0.0;
        dlogits[a] = advantages[t] * (probs_seq[t][a] - onehot) - beta * dent[a];
      }
      double dvalue = values[t] - returns[t];
      net.backward_step(analytic, caches[t], dlogits, dvalue, dh, dc);
    }
    if (with_aux) {
      AuxCacheT<double> cache;
      net.aux_forward(analytic, aux_frames, aux_words, aux_label, &cache);
      net.aux_backward(analytic, cache, 1.0);
    }
  }

  std::vector<ParamCoord> coords;
  for (const auto& b : params.blocks) {
    size_t n = b.value.data.size();
    size_t take = coords_per_block <= 0 ? n : std::min<size_t>(coords_per_block, n);
    for (size_t k = 0; k < take; ++k) {
      size_t idx = take == n ? k : static_cast<size_t>(rng.uniform_int(static_cast<int>(n)));
      coords.push_back({b.name, idx});
    }
  }
  return finite_difference_check(params, analytic, loss_fn, coords, 1e-5);
}

}  // namespace gwla
