#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwla/ops.hpp"
#include "gwla/param_store.hpp"
#include "gwla/rng.hpp"
#include "gwla/vocab.hpp"

namespace gwla {

enum class Variant { Baseline, LayerwiseAttention };

inline const char* variant_name(Variant v) {
  return v == Variant::Baseline ? "baseline" : "layerwise_attention";
}

/// Reference configuration: conv ladder (32,64,64) channels, (8,4,3)
/// kernels, (4,2,1) strides, relu after the first two layers only; 128-dim
/// word embeddings; 256-wide mixing layer; 128-wide LSTM core; 8 actions.
struct AgentConfig {
  int frame_side = 84;
  int conv_channels[3] = {32, 64, 64};
  int conv_kernels[3] = {8, 4, 3};
  int conv_strides[3] = {4, 2, 1};
  int embed_dim = 128;
  int mixing_width = 256;
  int lstm_width = 128;
  int num_actions = 8;
  int vocab_size = 56;
  Variant variant = Variant::Baseline;

  // Derived by derive():
  int n[3] = {0, 0, 0};   // per-layer spatial side
  int vision_flat = 0;    // channels3 * n3^2
  int attn_d = 0;         // n1^2 + n2^2 + n3^2
  int context_width = 0;  // channels1 + channels2 + channels3
  int mix_in_width = 0;
  int aux_in_width = 0;

  void derive() {
    int side = frame_side;
    for (int i = 0; i < 3; ++i) {
      side = conv_out_size(side, conv_kernels[i], conv_strides[i]);
      if (side < 1) throw std::invalid_argument("AgentConfig: frame side too small for conv ladder");
      n[i] = side;
    }
    vision_flat = conv_channels[2] * n[2] * n[2];
    attn_d = n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
    context_width = conv_channels[0] + conv_channels[1] + conv_channels[2];
    mix_in_width =
        (variant == Variant::Baseline ? vision_flat : context_width) + embed_dim;
    aux_in_width = vision_flat + embed_dim;
  }

  static AgentConfig make(Variant v, int vocab, int side = 84) {
    AgentConfig c;
    c.variant = v;
    c.vocab_size = vocab;
    c.frame_side = side;
    c.derive();
    return c;
  }
};

template <typename S>
struct LstmStateT {
  TensorT<S> h, c;
  static LstmStateT zeros(int width) { return {TensorT<S>({width}), TensorT<S>({width})}; }
};
using LstmState = LstmStateT<float>;

template <typename S>
struct ForwardDiagnosticsT {
  TensorT<S> attention;  // length attn_d (attention variant only)
  std::array<double, 3> layer_masses = {0, 0, 0};
  double pathway_ratio = 0;
};
using ForwardDiagnostics = ForwardDiagnosticsT<float>;

template <typename S>
struct StepCacheT {
  TensorT<S> frame;
  int word_id = 0;
  TensorT<S> conv_post[3];  // post-relu for layers 1-2, raw output for layer 3
  TensorT<S> embed;
  TensorT<S> attention;  // probs over attn_d locations
  TensorT<S> contexts;   // concatenated per-layer context vectors
  TensorT<S> mix_in;
  TensorT<S> mix_out;
  LstmCache<S> lstm;
};
using StepCache = StepCacheT<float>;

template <typename S>
struct ForwardResultT {
  TensorT<S> logits;
  TensorT<S> probs;
  S value = 0;
  LstmStateT<S> state;
  ForwardDiagnosticsT<S> diag;
};

/// Mass of the attention distribution falling on each conv layer's
/// locations. Slices are [0, n1^2), [n1^2, n1^2+n2^2), [.., d).
template <typename S>
std::array<double, 3> layer_mass(const TensorT<S>& attention, const AgentConfig& cfg) {
  if (attention.numel() != cfg.attn_d)
    throw std::invalid_argument("layer_mass: distribution length " +
                                std::to_string(attention.numel()) + " != d " +
                                std::to_string(cfg.attn_d));
  std::array<double, 3> m = {0, 0, 0};
  int off = 0;
  for (int layer = 0; layer < 3; ++layer) {
    int cnt = cfg.n[layer] * cfg.n[layer];
    for (int i = 0; i < cnt; ++i) m[layer] += static_cast<double>(attention[off + i]);
    off += cnt;
  }
  return m;
}

/// Mean |activation| over the visual span divided by mean |activation| over
/// the language span; +inf when the language span is identically zero.
template <typename S>
double pathway_ratio(const TensorT<S>& mix_in, int visual_span) {
  double vis = 0, lang = 0;
  int total = mix_in.numel();
  for (int i = 0; i < visual_span; ++i) vis += std::abs(static_cast<double>(mix_in[i]));
  for (int i = visual_span; i < total; ++i) lang += std::abs(static_cast<double>(mix_in[i]));
  vis /= visual_span;
  lang /= (total - visual_span);
  if (lang == 0) return std::numeric_limits<double>::infinity();
  return vis / lang;
}

template <typename S>
struct AuxCacheT {
  std::vector<TensorT<S>> frames;
  std::vector<int> words;
  std::vector<TensorT<S>> conv_post[3];  // per observation
  std::vector<TensorT<S>> embeds;
  TensorT<S> avg;  // averaged concatenated features
  TensorT<S> probs;
  int label = 0;
};
using AuxCache = AuxCacheT<float>;

namespace detail {

/// (k, n, n) channel-major feature map -> (n*n, k) location-major matrix.
template <typename S>
void features_to_rows(const TensorT<S>& post, TensorT<S>& rows) {
  const int k = post.dim(0), nn = post.dim(1) * post.dim(2);
  if (rows.shape != std::vector<int>{nn, k}) rows = TensorT<S>({nn, k});
  const S* src = post.ptr();
  S* dst = rows.ptr();
  for (int c = 0; c < k; ++c)
    for (int l = 0; l < nn; ++l) dst[static_cast<size_t>(l) * k + c] = src[static_cast<size_t>(c) * nn + l];
}

template <typename S>
void rows_to_features_add(const TensorT<S>& rows, TensorT<S>& post_grad) {
  const int k = post_grad.dim(0), nn = post_grad.dim(1) * post_grad.dim(2);
  const S* src = rows.ptr();
  S* dst = post_grad.ptr();
  for (int c = 0; c < k; ++c)
    for (int l = 0; l < nn; ++l) dst[static_cast<size_t>(c) * nn + l] += src[static_cast<size_t>(l) * k + c];
}

}  // namespace detail

/// Both agent variants behind one interface. Parameters live in an external
/// ParamStoreT so workers can snapshot/accumulate without copying the net.
template <typename S>
class AgentNetT {
 public:
  explicit AgentNetT(AgentConfig cfg) : cfg_(cfg) {
    if (cfg_.mix_in_width == 0)
      throw std::invalid_argument("AgentNetT: config not derived (call AgentConfig::derive)");
  }

  const AgentConfig& config() const { return cfg_; }

  /// Registers all parameter blocks in a fixed order and initializes them:
  /// uniform +-sqrt(6/(fan_in+fan_out)) for weights, zeros for biases
  /// (LSTM forget-gate bias 1), normal(0, embed_std) for embeddings.
  void register_params(ParamStoreT<S>& store, RngStream& rng, double embed_std) const {
    auto xavier = [&rng](TensorT<S>& t, int fan_in, int fan_out) {
      double lim = std::sqrt(6.0 / (fan_in + fan_out));
      for (S& v : t.data) v = static_cast<S>(rng.uniform(-lim, lim));
    };
    auto add_linear = [&](const std::string& name, int out, int in) {
      TensorT<S> w({out, in});
      xavier(w, in, out);
      store.add(name + ".w", std::move(w));
      store.add(name + ".b", TensorT<S>({out}));
    };

    int in_ch = 3;
    for (int i = 0; i < 3; ++i) {
      int oc = cfg_.conv_channels[i], k = cfg_.conv_kernels[i];
      TensorT<S> w({oc, in_ch, k, k});
      xavier(w, in_ch * k * k, oc * k * k);
      store.add("vision.conv" + std::to_string(i + 1) + ".w", std::move(w));
      store.add("vision.conv" + std::to_string(i + 1) + ".b", TensorT<S>({oc}));
      in_ch = oc;
    }
    {
      TensorT<S> e({cfg_.vocab_size, cfg_.embed_dim});
      for (S& v : e.data) v = static_cast<S>(rng.normal(0.0, embed_std));
      store.add("lang.embed", std::move(e));
    }
    if (cfg_.variant == Variant::LayerwiseAttention)
      for (int i = 0; i < 3; ++i)
        add_linear("attn.proj" + std::to_string(i + 1), cfg_.embed_dim, cfg_.conv_channels[i]);
    add_linear("mix", cfg_.mixing_width, cfg_.mix_in_width);
    {
      int in = cfg_.mixing_width + cfg_.lstm_width;
      TensorT<S> w({4 * cfg_.lstm_width, in});
      xavier(w, in, 4 * cfg_.lstm_width);
      store.add("lstm.w", std::move(w));
      TensorT<S> b({4 * cfg_.lstm_width});
      for (int j = 0; j < cfg_.lstm_width; ++j) b[cfg_.lstm_width + j] = S(1);  // forget gate
      store.add("lstm.b", std::move(b));
    }
    add_linear("policy", cfg_.num_actions, cfg_.lstm_width);
    add_linear("value", 1, cfg_.lstm_width);
    add_linear("aux", 3, cfg_.aux_in_width);
  }

  ForwardResultT<S> forward(const ParamStoreT<S>& p, const TensorT<S>& frame, int word_id,
                            const LstmStateT<S>& state, StepCacheT<S>* cache = nullptr) const {
    if (frame.shape != std::vector<int>{3, cfg_.frame_side, cfg_.frame_side})
      throw std::invalid_argument("forward: frame " + frame.shape_str() + " does not match 3x" +
                                  std::to_string(cfg_.frame_side) + "x" +
                                  std::to_string(cfg_.frame_side));
    StepCacheT<S> local;
    StepCacheT<S>& cc = cache ? *cache : local;
    cc.frame = frame;
    cc.word_id = word_id;

    const TensorT<S>* cur = &frame;
    for (int i = 0; i < 3; ++i) {
      TensorT<S> out = conv2d(*cur, p.value(conv_name(i) + ".w"), p.value(conv_name(i) + ".b"),
                              cfg_.conv_strides[i]);
      if (i < 2) out = relu(out);
      cc.conv_post[i] = std::move(out);
      cur = &cc.conv_post[i];
    }
    cc.embed = embedding_lookup(word_id, p.value("lang.embed"));

    ForwardResultT<S> res;
    if (cfg_.variant == Variant::Baseline) {
      cc.mix_in = TensorT<S>({cfg_.mix_in_width});
      std::copy(cc.conv_post[2].data.begin(), cc.conv_post[2].data.end(), cc.mix_in.data.begin());
      std::copy(cc.embed.data.begin(), cc.embed.data.end(),
                cc.mix_in.data.begin() + cfg_.vision_flat);
    } else {
      forward_attention_stage(p, cc, res.diag);
      cc.mix_in = TensorT<S>({cfg_.mix_in_width});
      std::copy(cc.contexts.data.begin(), cc.contexts.data.end(), cc.mix_in.data.begin());
      std::copy(cc.embed.data.begin(), cc.embed.data.end(),
                cc.mix_in.data.begin() + cfg_.context_width);
    }
    cc.mix_out = linear(cc.mix_in, p.value("mix.w"), p.value("mix.b"));

    res.state = LstmStateT<S>::zeros(cfg_.lstm_width);
    lstm_step(cc.mix_out, state.h, state.c, p.value("lstm.w"), p.value("lstm.b"), res.state.h,
              res.state.c, &cc.lstm);

    res.logits = linear(res.state.h, p.value("policy.w"), p.value("policy.b"));
    res.probs = softmax(res.logits);
    res.value = linear(res.state.h, p.value("value.w"), p.value("value.b"))[0];
    int vis_span = cfg_.variant == Variant::Baseline ? cfg_.vision_flat : cfg_.context_width;
    res.diag.pathway_ratio = pathway_ratio(cc.mix_in, vis_span);
    return res;
  }

  /// Accumulates parameter gradients for one unrolled step, given loss
  /// gradients at the heads and the recurrent gradients flowing back from
  /// step t+1 (dh/dc, updated in place to the t-1 values). `dframe`, when
  /// requested, receives the input-pixel gradient.
  void backward_step(ParamStoreT<S>& p, const StepCacheT<S>& cc, const TensorT<S>& dlogits,
                     S dvalue, TensorT<S>& dh, TensorT<S>& dc, TensorT<S>* dframe = nullptr) const {
    TensorT<S> dh_total = dh;
    TensorT<S> h = lstm_h(cc);
    {
      TensorT<S> dx;
      head_backward(p, "policy", h, dlogits, dx);
      for (int i = 0; i < cfg_.lstm_width; ++i) dh_total[i] += dx[i];
    }
    {
      TensorT<S> dv({1});
      dv[0] = dvalue;
      TensorT<S> dx;
      head_backward(p, "value", h, dv, dx);
      for (int i = 0; i < cfg_.lstm_width; ++i) dh_total[i] += dx[i];
    }

    TensorT<S> dmix_out, dh_prev, dc_prev;
    lstm_step_backward(cc.lstm, p.value("lstm.w"), dh_total, dc, p.grad("lstm.w"),
                       p.grad("lstm.b"), dmix_out, dh_prev, dc_prev);
    dh = std::move(dh_prev);
    dc = std::move(dc_prev);

    TensorT<S> dmix_in;
    linear_backward(cc.mix_in, p.value("mix.w"), dmix_out, p.grad("mix.w"), p.grad("mix.b"),
                    &dmix_in);

    TensorT<S> dembed({cfg_.embed_dim});
    TensorT<S> dconv[3];
    for (int i = 0; i < 3; ++i) dconv[i] = TensorT<S>(cc.conv_post[i].shape);

    if (cfg_.variant == Variant::Baseline) {
      std::copy(dmix_in.data.begin(), dmix_in.data.begin() + cfg_.vision_flat,
                dconv[2].data.begin());
      for (int i = 0; i < cfg_.embed_dim; ++i) dembed[i] = dmix_in[cfg_.vision_flat + i];
    } else {
      TensorT<S> dcontexts({cfg_.context_width});
      std::copy(dmix_in.data.begin(), dmix_in.data.begin() + cfg_.context_width,
                dcontexts.data.begin());
      for (int i = 0; i < cfg_.embed_dim; ++i) dembed[i] = dmix_in[cfg_.context_width + i];
      backward_attention_stage(p, cc, dcontexts, dembed, dconv);
    }

    backward_vision(p, cc, dconv, dframe);
    embedding_backward(cc.word_id, dembed, p.grad("lang.embed"));
  }

  /// Reward-sign prediction from the final observations of an episode:
  /// vision+language features of each observation, averaged, through a
  /// dedicated 3-way linear softmax head. Returns the cross-entropy loss.
  S aux_forward(const ParamStoreT<S>& p, const std::vector<TensorT<S>>& frames,
                const std::vector<int>& words, int label, AuxCacheT<S>* cache) const {
    AuxCacheT<S> local;
    AuxCacheT<S>& cc = cache ? *cache : local;
    cc.frames = frames;
    cc.words = words;
    cc.label = label;
    cc.avg = TensorT<S>({cfg_.aux_in_width});
    const size_t m = frames.size();
    for (int i = 0; i < 3; ++i) cc.conv_post[i].resize(m);
    cc.embeds.resize(m);
    for (size_t o = 0; o < m; ++o) {
      const TensorT<S>* cur = &frames[o];
      for (int i = 0; i < 3; ++i) {
        TensorT<S> out = conv2d(*cur, p.value(conv_name(i) + ".w"), p.value(conv_name(i) + ".b"),
                                cfg_.conv_strides[i]);
        if (i < 2) out = relu(out);
        cc.conv_post[i][o] = std::move(out);
        cur = &cc.conv_post[i][o];
      }
      cc.embeds[o] = embedding_lookup(words[o], p.value("lang.embed"));
      for (int i = 0; i < cfg_.vision_flat; ++i) cc.avg[i] += cc.conv_post[2][o][i];
      for (int i = 0; i < cfg_.embed_dim; ++i)
        cc.avg[cfg_.vision_flat + i] += cc.embeds[o][i];
    }
    for (S& v : cc.avg.data) v /= static_cast<S>(m);
    TensorT<S> logits = linear(cc.avg, p.value("aux.w"), p.value("aux.b"));
    cc.probs = softmax(logits);
    return cross_entropy(cc.probs, label);
  }

  void aux_backward(ParamStoreT<S>& p, const AuxCacheT<S>& cc, S scale) const {
    TensorT<S> dlogits = cross_entropy_grad_logits(cc.probs, cc.label);
    for (S& v : dlogits.data) v *= scale;
    TensorT<S> davg;
    linear_backward(cc.avg, p.value("aux.w"), dlogits, p.grad("aux.w"), p.grad("aux.b"), &davg);
    const size_t m = cc.frames.size();
    for (S& v : davg.data) v /= static_cast<S>(m);
    for (size_t o = 0; o < m; ++o) {
      StepCacheT<S> step;
      step.frame = cc.frames[o];
      step.word_id = cc.words[o];
      for (int i = 0; i < 3; ++i) step.conv_post[i] = cc.conv_post[i][o];
      TensorT<S> dconv[3];
      for (int i = 0; i < 3; ++i) dconv[i] = TensorT<S>(step.conv_post[i].shape);
      std::copy(davg.data.begin(), davg.data.begin() + cfg_.vision_flat, dconv[2].data.begin());
      backward_vision(p, step, dconv, nullptr);
      TensorT<S> dembed({cfg_.embed_dim});
      for (int i = 0; i < cfg_.embed_dim; ++i) dembed[i] = davg[cfg_.vision_flat + i];
      embedding_backward(cc.words[o], dembed, p.grad("lang.embed"));
    }
  }

  /// Scalar J = sum over locations of attention * ||feature||_2,
  /// backpropagated to the input. Returns the per-pixel max |gradient| over
  /// channels, normalized to [0,1] by its maximum (all-zero map if J has no
  /// input dependence).
  TensorT<S> saliency(const ParamStoreT<S>& p, const TensorT<S>& frame, int word_id) const {
    if (cfg_.variant != Variant::LayerwiseAttention)
      throw std::logic_error("saliency: requires the layerwise-attention variant");
    StepCacheT<S> cc;
    cc.frame = frame;
    cc.word_id = word_id;
    const TensorT<S>* cur = &frame;
    for (int i = 0; i < 3; ++i) {
      TensorT<S> out = conv2d(*cur, p.value(conv_name(i) + ".w"), p.value(conv_name(i) + ".b"),
                              cfg_.conv_strides[i]);
      if (i < 2) out = relu(out);
      cc.conv_post[i] = std::move(out);
      cur = &cc.conv_post[i];
    }
    cc.embed = embedding_lookup(word_id, p.value("lang.embed"));
    ForwardDiagnosticsT<S> diag;
    forward_attention_stage(p, cc, diag);

    // dJ/da_l = ||f_l||; dJ/df_l = a_l * f_l / ||f_l||.
    TensorT<S> da({cfg_.attn_d});
    TensorT<S> dconv[3];
    for (int i = 0; i < 3; ++i) dconv[i] = TensorT<S>(cc.conv_post[i].shape);
    int off = 0;
    for (int layer = 0; layer < 3; ++layer) {
      const int k = cfg_.conv_channels[layer];
      const int nn = cfg_.n[layer] * cfg_.n[layer];
      const TensorT<S>& post = cc.conv_post[layer];
      TensorT<S>& dpost = dconv[layer];
      for (int l = 0; l < nn; ++l) {
        double sq = 0;
        for (int c = 0; c < k; ++c) {
          S v = post[static_cast<size_t>(c) * nn + l];
          sq += static_cast<double>(v) * static_cast<double>(v);
        }
        double norm = std::sqrt(sq);
        da[off + l] = static_cast<S>(norm);
        if (norm > 0) {
          S a = cc.attention[off + l];
          for (int c = 0; c < k; ++c)
            dpost[static_cast<size_t>(c) * nn + l] +=
                a * post[static_cast<size_t>(c) * nn + l] / static_cast<S>(norm);
        }
      }
      off += nn;
    }
    // Route the attention-distribution part of the gradient; parameter and
    // embedding gradients are discarded by accumulating into scratch.
    ParamStoreT<S> scratch_grads = clone_grad_layout(p);
    TensorT<S> dembed({cfg_.embed_dim});
    backward_attention_distribution(scratch_grads, cc, da, dembed, dconv);
    TensorT<S> dframe;
    backward_vision(scratch_grads, cc, dconv, &dframe);

    TensorT<S> map({cfg_.frame_side, cfg_.frame_side});
    const int hw = cfg_.frame_side * cfg_.frame_side;
    S mx = 0;
    for (int i = 0; i < hw; ++i) {
      S m = std::max(std::abs(dframe[i]), std::max(std::abs(dframe[hw + i]), std::abs(dframe[2 * hw + i])));
      map[i] = m;
      mx = std::max(mx, m);
    }
    if (mx > 0)
      for (S& v : map.data) v /= mx;
    return map;
  }

 private:
  std::string conv_name(int i) const { return "vision.conv" + std::to_string(i + 1); }

  static TensorT<S> lstm_h(const StepCacheT<S>& cc) {
    TensorT<S> h(cc.lstm.o.shape);
    for (size_t i = 0; i < h.data.size(); ++i) h.data[i] = cc.lstm.o.data[i] * cc.lstm.tanh_c.data[i];
    return h;
  }

  ParamStoreT<S> clone_grad_layout(const ParamStoreT<S>& p) const {
    ParamStoreT<S> out;
    for (const auto& b : p.blocks) out.add(b.name, TensorT<S>(b.value.shape));
    // values zero; only grads are used
    for (auto& b : out.blocks) b.value = p.value(b.name);
    return out;
  }

  void head_backward(ParamStoreT<S>& p, const std::string& name, const TensorT<S>& input,
                     const TensorT<S>& dout, TensorT<S>& dinput) const {
    linear_backward(input, p.value(name + ".w"), dout, p.grad(name + ".w"), p.grad(name + ".b"),
                    &dinput);
  }

  /// Attention scoring and context pooling. Fills cc.attention, cc.contexts
  /// and the diagnostic masses.
  void forward_attention_stage(const ParamStoreT<S>& p, StepCacheT<S>& cc,
                               ForwardDiagnosticsT<S>& diag) const {
    TensorT<S> logits({cfg_.attn_d});
    TensorT<S> rows;  // per-layer (nn, k) view
    int off = 0;
    for (int layer = 0; layer < 3; ++layer) {
      const int k = cfg_.conv_channels[layer];
      const int nn = cfg_.n[layer] * cfg_.n[layer];
      detail::features_to_rows(cc.conv_post[layer], rows);
      const TensorT<S>& w = p.value(proj_name(layer) + ".w");  // (K, k)
      const TensorT<S>& b = p.value(proj_name(layer) + ".b");  // (K)
      // w_e = W^T e (k); logit_l = f_l . w_e + e . b
      TensorT<S> we({k});
      gemv(true, cfg_.embed_dim, k, S(1), w.ptr(), cc.embed.ptr(), S(0), we.ptr());
      S be = 0;
      for (int i = 0; i < cfg_.embed_dim; ++i) be += b[i] * cc.embed[i];
      gemv(false, nn, k, S(1), rows.ptr(), we.ptr(), S(0), logits.ptr() + off);
      for (int l = 0; l < nn; ++l) logits[off + l] += be;
      off += nn;
    }
    cc.attention = softmax(logits);

    cc.contexts = TensorT<S>({cfg_.context_width});
    off = 0;
    int coff = 0;
    for (int layer = 0; layer < 3; ++layer) {
      const int k = cfg_.conv_channels[layer];
      const int nn = cfg_.n[layer] * cfg_.n[layer];
      detail::features_to_rows(cc.conv_post[layer], rows);
      // context = rows^T * a_layer
      gemv(true, nn, k, S(1), rows.ptr(), cc.attention.ptr() + off, S(0),
           cc.contexts.ptr() + coff);
      off += nn;
      coff += k;
    }
    diag.attention = cc.attention;
    diag.layer_masses = layer_mass(cc.attention, cfg_);
  }

  std::string proj_name(int layer) const { return "attn.proj" + std::to_string(layer + 1); }

  /// Backward of the attention stage given context gradients plus any
  /// gradient flowing directly into the embedding. Adds feature gradients
  /// into dconv.
  void backward_attention_stage(ParamStoreT<S>& p, const StepCacheT<S>& cc,
                                const TensorT<S>& dcontexts, TensorT<S>& dembed,
                                TensorT<S> (&dconv)[3]) const {
    // da from the context path, then shared distribution backward.
    TensorT<S> da({cfg_.attn_d});
    TensorT<S> rows;
    int off = 0, coff = 0;
    for (int layer = 0; layer < 3; ++layer) {
      const int k = cfg_.conv_channels[layer];
      const int nn = cfg_.n[layer] * cfg_.n[layer];
      detail::features_to_rows(cc.conv_post[layer], rows);
      // da_l = f_l . dcontext ; df_l += a_l * dcontext
      gemv(false, nn, k, S(1), rows.ptr(), dcontexts.ptr() + coff, S(0), da.ptr() + off);
      S* dpost = dconv[layer].ptr();
      const S* a = cc.attention.ptr() + off;
      for (int c = 0; c < k; ++c)
        for (int l = 0; l < nn; ++l)
          dpost[static_cast<size_t>(c) * nn + l] += a[l] * dcontexts[coff + c];
      off += nn;
      coff += k;
    }
    backward_attention_distribution(p, cc, da, dembed, dconv);
  }

  /// Given dJ/da (gradient w.r.t. the attention probabilities), backprops
  /// through the joint softmax and the per-layer projections, accumulating
  /// projection/embedding gradients and feature gradients.
  void backward_attention_distribution(ParamStoreT<S>& p, const StepCacheT<S>& cc,
                                       const TensorT<S>& da, TensorT<S>& dembed,
                                       TensorT<S> (&dconv)[3]) const {
    TensorT<S> dz = softmax_backward(cc.attention, da);
    TensorT<S> rows;
    int off = 0;
    for (int layer = 0; layer < 3; ++layer) {
      const int k = cfg_.conv_channels[layer];
      const int nn = cfg_.n[layer] * cfg_.n[layer];
      detail::features_to_rows(cc.conv_post[layer], rows);
      const TensorT<S>& w = p.value(proj_name(layer) + ".w");
      const TensorT<S>& b = p.value(proj_name(layer) + ".b");
      const S* dzl = dz.ptr() + off;

      // s = rows^T dz (k);   dW += e outer s;   db += (sum dz) e
      TensorT<S> s({k});
      gemv(true, nn, k, S(1), rows.ptr(), dzl, S(0), s.ptr());
      S dz_sum = 0;
      for (int l = 0; l < nn; ++l) dz_sum += dzl[l];
      TensorT<S>& gw = p.grad(proj_name(layer) + ".w");
      TensorT<S>& gb = p.grad(proj_name(layer) + ".b");
      for (int i = 0; i < cfg_.embed_dim; ++i) {
        S e = cc.embed[i];
        S* grow = gw.ptr() + static_cast<size_t>(i) * k;
        for (int c = 0; c < k; ++c) grow[c] += e * s[c];
        gb[i] += dz_sum * e;
      }
      // de += W s + dz_sum * b
      TensorT<S> ws({cfg_.embed_dim});
      gemv(false, cfg_.embed_dim, k, S(1), w.ptr(), s.ptr(), S(0), ws.ptr());
      for (int i = 0; i < cfg_.embed_dim; ++i) dembed[i] += ws[i] + dz_sum * b[i];
      // df_l += dz_l * (W^T e)
      TensorT<S> we({k});
      gemv(true, cfg_.embed_dim, k, S(1), w.ptr(), cc.embed.ptr(), S(0), we.ptr());
      S* dpost = dconv[layer].ptr();
      for (int c = 0; c < k; ++c)
        for (int l = 0; l < nn; ++l) dpost[static_cast<size_t>(c) * nn + l] += dzl[l] * we[c];
      off += nn;
    }
  }

  /// Chains gradients down the conv ladder (attention contributions must
  /// already be in dconv). Writes the input gradient when requested.
  void backward_vision(ParamStoreT<S>& p, const StepCacheT<S>& cc, TensorT<S> (&dconv)[3],
                       TensorT<S>* dframe) const {
    TensorT<S> dinput;
    for (int i = 2; i >= 0; --i) {
      const TensorT<S>& input = i == 0 ? cc.frame : cc.conv_post[i - 1];
      if (i < 2) relu_backward(cc.conv_post[i], dconv[i]);
      bool need_dinput = i > 0 || dframe != nullptr;
      conv2d_backward(input, p.value(conv_name(i) + ".w"), cfg_.conv_strides[i], dconv[i],
                      p.grad(conv_name(i) + ".w"), p.grad(conv_name(i) + ".b"),
                      need_dinput ? &dinput : nullptr);
      if (i > 0)
        for (size_t j = 0; j < dinput.data.size(); ++j) dconv[i - 1].data[j] += dinput.data[j];
    }
    if (dframe) *dframe = std::move(dinput);
  }

  AgentConfig cfg_;
};

using AgentNet = AgentNetT<float>;

/// Per-word embedding rows with a 2D PCA projection for plotting.
struct EmbeddingExport {
  std::vector<std::string> words;
  std::vector<WordClass> classes;
  Tensor vectors;  // (V, K)
  Tensor pca;      // (V, 2)
};

EmbeddingExport export_embeddings(const ParamStore& params, const Vocabulary& vocab);

/// Fraction of rows whose nearest class centroid is their own class.
double nearest_centroid_purity(const Tensor& vectors, const std::vector<WordClass>& classes);

}  // namespace gwla
