#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwla/blas.hpp"
#include "gwla/tensor.hpp"

namespace gwla {

inline int conv_out_size(int in, int kernel, int stride) {
  return (in - kernel) / stride + 1;
}

namespace detail {

// Unpack (C,H,W) input into a (C*k*k) x (OH*OW) patch matrix.
template <typename S>
void im2col(const TensorT<S>& input, int kernel, int stride, TensorT<S>& cols) {
  const int c_in = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int oh = conv_out_size(h, kernel, stride), ow = conv_out_size(w, kernel, stride);
  const int patch = c_in * kernel * kernel;
  if (cols.shape != std::vector<int>{patch, oh * ow}) cols = TensorT<S>({patch, oh * ow});
  S* dst = cols.ptr();
  for (int c = 0; c < c_in; ++c) {
    const S* plane = input.ptr() + static_cast<size_t>(c) * h * w;
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        for (int oy = 0; oy < oh; ++oy) {
          const S* src = plane + (oy * stride + ky) * w + kx;
          for (int ox = 0; ox < ow; ++ox) *dst++ = src[ox * stride];
        }
      }
    }
  }
}

// Scatter-add the patch-matrix gradient back onto the input layout.
template <typename S>
void col2im_add(const TensorT<S>& cols, int kernel, int stride, TensorT<S>& grad_input) {
  const int c_in = grad_input.dim(0), h = grad_input.dim(1), w = grad_input.dim(2);
  const int oh = conv_out_size(h, kernel, stride), ow = conv_out_size(w, kernel, stride);
  const S* src = cols.ptr();
  for (int c = 0; c < c_in; ++c) {
    S* plane = grad_input.ptr() + static_cast<size_t>(c) * h * w;
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        for (int oy = 0; oy < oh; ++oy) {
          S* dst = plane + (oy * stride + ky) * w + kx;
          for (int ox = 0; ox < ow; ++ox) dst[ox * stride] += *src++;
        }
      }
    }
  }
}

}  // namespace detail

/// Valid (unpadded) 2D convolution. input (C,H,W), kernels (OC,C,k,k),
/// bias (OC); output (OC, floor((H-k)/s)+1, floor((W-k)/s)+1).
template <typename S>
TensorT<S> conv2d(const TensorT<S>& input, const TensorT<S>& kernels, const TensorT<S>& bias,
                  int stride, TensorT<S>* cols_ws = nullptr) {
  if (input.rank() != 3 || kernels.rank() != 4 || kernels.dim(1) != input.dim(0) ||
      kernels.dim(2) != kernels.dim(3) || input.dim(1) < kernels.dim(2) ||
      input.dim(2) < kernels.dim(3))
    throw std::invalid_argument("conv2d: input " + input.shape_str() + " incompatible with kernels " +
                                kernels.shape_str());
  if (stride < 1) throw std::invalid_argument("conv2d: stride must be positive");
  const int oc = kernels.dim(0), k = kernels.dim(2);
  const int oh = conv_out_size(input.dim(1), k, stride), ow = conv_out_size(input.dim(2), k, stride);
  const int patch = input.dim(0) * k * k;

  TensorT<S> local_cols;
  TensorT<S>& cols = cols_ws ? *cols_ws : local_cols;
  detail::im2col(input, k, stride, cols);

  TensorT<S> out({oc, oh, ow});
  gemm(false, false, oc, oh * ow, patch, S(1), kernels.ptr(), patch, cols.ptr(), oh * ow, S(0),
       out.ptr(), oh * ow);
  for (int m = 0; m < oc; ++m) {
    S b = bias[static_cast<size_t>(m)];
    S* row = out.ptr() + static_cast<size_t>(m) * oh * ow;
    for (int i = 0; i < oh * ow; ++i) row[i] += b;
  }
  return out;
}

/// Accumulates parameter gradients; writes (does not accumulate) grad_input
/// when non-null.
template <typename S>
void conv2d_backward(const TensorT<S>& input, const TensorT<S>& kernels, int stride,
                     const TensorT<S>& grad_out, TensorT<S>& grad_kernels, TensorT<S>& grad_bias,
                     TensorT<S>* grad_input, TensorT<S>* cols_ws = nullptr,
                     TensorT<S>* dcols_ws = nullptr) {
  const int oc = kernels.dim(0), k = kernels.dim(2);
  const int oh = grad_out.dim(1), ow = grad_out.dim(2);
  const int patch = input.dim(0) * k * k;

  TensorT<S> local_cols, local_dcols;
  TensorT<S>& cols = cols_ws ? *cols_ws : local_cols;
  detail::im2col(input, k, stride, cols);

  for (int m = 0; m < oc; ++m) {
    const S* row = grad_out.ptr() + static_cast<size_t>(m) * oh * ow;
    S acc = 0;
    for (int i = 0; i < oh * ow; ++i) acc += row[i];
    grad_bias[static_cast<size_t>(m)] += acc;
  }
  // dW += dY * cols^T
  gemm(false, true, oc, patch, oh * ow, S(1), grad_out.ptr(), oh * ow, cols.ptr(), oh * ow, S(1),
       grad_kernels.ptr(), patch);
  if (grad_input) {
    TensorT<S>& dcols = dcols_ws ? *dcols_ws : local_dcols;
    if (dcols.shape != cols.shape) dcols = TensorT<S>(cols.shape);
    // dcols = W^T * dY
    gemm(true, false, patch, oh * ow, oc, S(1), kernels.ptr(), patch, grad_out.ptr(), oh * ow, S(0),
         dcols.ptr(), oh * ow);
    if (grad_input->shape != input.shape) *grad_input = TensorT<S>(input.shape);
    grad_input->zero();
    detail::col2im_add(dcols, k, stride, *grad_input);
  }
}

/// y = W x + b with W (out,in), x (in).
template <typename S>
TensorT<S> linear(const TensorT<S>& x, const TensorT<S>& weights, const TensorT<S>& bias) {
  if (weights.rank() != 2 || x.numel() != weights.dim(1) || bias.numel() != weights.dim(0))
    throw std::invalid_argument("linear: weights " + weights.shape_str() + " incompatible with input " +
                                x.shape_str());
  TensorT<S> y({weights.dim(0)});
  std::copy(bias.data.begin(), bias.data.end(), y.data.begin());
  gemv(false, weights.dim(0), weights.dim(1), S(1), weights.ptr(), x.ptr(), S(1), y.ptr());
  return y;
}

template <typename S>
void linear_backward(const TensorT<S>& x, const TensorT<S>& weights, const TensorT<S>& grad_y,
                     TensorT<S>& grad_w, TensorT<S>& grad_b, TensorT<S>* grad_x = nullptr) {
  const int out = weights.dim(0), in = weights.dim(1);
  for (int i = 0; i < out; ++i) grad_b[static_cast<size_t>(i)] += grad_y[static_cast<size_t>(i)];
  // dW += dy x^T
  gemm(false, false, out, in, 1, S(1), grad_y.ptr(), 1, x.ptr(), in, S(1), grad_w.ptr(), in);
  if (grad_x) {
    if (grad_x->shape != x.shape) *grad_x = TensorT<S>(x.shape);
    gemv(true, out, in, S(1), weights.ptr(), grad_y.ptr(), S(0), grad_x->ptr());
  }
}

template <typename S>
TensorT<S> relu(const TensorT<S>& x) {
  TensorT<S> y = x;
  for (S& v : y.data) v = v > S(0) ? v : S(0);
  return y;
}

/// grad_x += relu'(x) * grad_y, computed from the pre-activation input.
template <typename S>
void relu_backward(const TensorT<S>& x, TensorT<S>& grad_y) {
  for (size_t i = 0; i < x.data.size(); ++i)
    if (x.data[i] <= S(0)) grad_y.data[i] = S(0);
}

template <typename S>
struct LstmCache {
  TensorT<S> x, h_prev, c_prev;
  TensorT<S> i, f, g, o;   // post-nonlinearity gates
  TensorT<S> c_new, tanh_c;
};

/// One step of a standard LSTM. weights (4H, X+H) with gate order
/// [input, forget, candidate, output]; bias (4H).
template <typename S>
void lstm_step(const TensorT<S>& x, const TensorT<S>& h_prev, const TensorT<S>& c_prev,
               const TensorT<S>& weights, const TensorT<S>& bias, TensorT<S>& h_out,
               TensorT<S>& c_out, LstmCache<S>* cache = nullptr) {
  const int hidden = h_prev.numel();
  const int in = x.numel();
  if (weights.rank() != 2 || weights.dim(0) != 4 * hidden || weights.dim(1) != in + hidden ||
      c_prev.numel() != hidden)
    throw std::invalid_argument("lstm_step: weights " + weights.shape_str() +
                                " incompatible with input " + x.shape_str() + " and state size " +
                                std::to_string(hidden));
  TensorT<S> xh({in + hidden});
  std::copy(x.data.begin(), x.data.end(), xh.data.begin());
  std::copy(h_prev.data.begin(), h_prev.data.end(), xh.data.begin() + in);
  TensorT<S> z({4 * hidden});
  std::copy(bias.data.begin(), bias.data.end(), z.data.begin());
  gemv(false, 4 * hidden, in + hidden, S(1), weights.ptr(), xh.ptr(), S(1), z.ptr());

  auto sigmoid = [](S v) { return S(1) / (S(1) + std::exp(-v)); };
  TensorT<S> gi({hidden}), gf({hidden}), gg({hidden}), go({hidden});
  for (int j = 0; j < hidden; ++j) {
    gi[j] = sigmoid(z[j]);
    gf[j] = sigmoid(z[hidden + j]);
    gg[j] = std::tanh(z[2 * hidden + j]);
    go[j] = sigmoid(z[3 * hidden + j]);
  }
  if (h_out.shape != h_prev.shape) h_out = TensorT<S>(h_prev.shape);
  if (c_out.shape != c_prev.shape) c_out = TensorT<S>(c_prev.shape);
  TensorT<S> tanh_c({hidden});
  for (int j = 0; j < hidden; ++j) {
    c_out[j] = gf[j] * c_prev[j] + gi[j] * gg[j];
    tanh_c[j] = std::tanh(c_out[j]);
    h_out[j] = go[j] * tanh_c[j];
  }
  if (cache) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->c_prev = c_prev;
    cache->i = std::move(gi);
    cache->f = std::move(gf);
    cache->g = std::move(gg);
    cache->o = std::move(go);
    cache->c_new = c_out;
    cache->tanh_c = std::move(tanh_c);
  }
}

/// Backward through one step. grad_h/grad_c are gradients flowing into h_out
/// and c_out; on return grad_h_prev/grad_c_prev/grad_x are written (not
/// accumulated), parameter grads are accumulated.
template <typename S>
void lstm_step_backward(const LstmCache<S>& cache, const TensorT<S>& weights,
                        const TensorT<S>& grad_h, const TensorT<S>& grad_c, TensorT<S>& grad_w,
                        TensorT<S>& grad_b, TensorT<S>& grad_x, TensorT<S>& grad_h_prev,
                        TensorT<S>& grad_c_prev) {
  const int hidden = cache.h_prev.numel();
  const int in = cache.x.numel();
  TensorT<S> dz({4 * hidden});
  TensorT<S> dc({hidden});
  for (int j = 0; j < hidden; ++j) {
    S th = cache.tanh_c[j];
    dc[j] = grad_c[j] + grad_h[j] * cache.o[j] * (S(1) - th * th);
    S dO = grad_h[j] * th;
    S dI = dc[j] * cache.g[j];
    S dF = dc[j] * cache.c_prev[j];
    S dG = dc[j] * cache.i[j];
    dz[j] = dI * cache.i[j] * (S(1) - cache.i[j]);
    dz[hidden + j] = dF * cache.f[j] * (S(1) - cache.f[j]);
    dz[2 * hidden + j] = dG * (S(1) - cache.g[j] * cache.g[j]);
    dz[3 * hidden + j] = dO * cache.o[j] * (S(1) - cache.o[j]);
  }
  TensorT<S> xh({in + hidden});
  std::copy(cache.x.data.begin(), cache.x.data.end(), xh.data.begin());
  std::copy(cache.h_prev.data.begin(), cache.h_prev.data.end(), xh.data.begin() + in);
  // dW += dz xh^T
  gemm(false, false, 4 * hidden, in + hidden, 1, S(1), dz.ptr(), 1, xh.ptr(), in + hidden, S(1),
       grad_w.ptr(), in + hidden);
  for (int j = 0; j < 4 * hidden; ++j) grad_b[j] += dz[j];
  TensorT<S> dxh({in + hidden});
  gemv(true, 4 * hidden, in + hidden, S(1), weights.ptr(), dz.ptr(), S(0), dxh.ptr());
  if (grad_x.shape != cache.x.shape) grad_x = TensorT<S>(cache.x.shape);
  if (grad_h_prev.shape != cache.h_prev.shape) grad_h_prev = TensorT<S>(cache.h_prev.shape);
  if (grad_c_prev.shape != cache.c_prev.shape) grad_c_prev = TensorT<S>(cache.c_prev.shape);
  std::copy(dxh.data.begin(), dxh.data.begin() + in, grad_x.data.begin());
  std::copy(dxh.data.begin() + in, dxh.data.end(), grad_h_prev.data.begin());
  for (int j = 0; j < hidden; ++j) grad_c_prev[j] = dc[j] * cache.f[j];
}

/// Row lookup into a (V,K) table.
template <typename S>
TensorT<S> embedding_lookup(int word_id, const TensorT<S>& table) {
  if (table.rank() != 2) throw std::invalid_argument("embedding_lookup: table must be rank 2");
  if (word_id < 0 || word_id >= table.dim(0))
    throw std::invalid_argument("embedding_lookup: id " + std::to_string(word_id) +
                                " out of range [0," + std::to_string(table.dim(0)) + ")");
  const int k = table.dim(1);
  TensorT<S> row({k});
  const S* src = table.ptr() + static_cast<size_t>(word_id) * k;
  std::copy(src, src + k, row.data.begin());
  return row;
}

/// Gradient scatters only into the looked-up row.
template <typename S>
void embedding_backward(int word_id, const TensorT<S>& grad_row, TensorT<S>& grad_table) {
  const int k = grad_table.dim(1);
  S* dst = grad_table.ptr() + static_cast<size_t>(word_id) * k;
  for (int j = 0; j < k; ++j) dst[j] += grad_row[j];
}

/// Numerically-stable softmax (max subtraction).
template <typename S>
TensorT<S> softmax(const TensorT<S>& logits) {
  TensorT<S> p = logits;
  S mx = *std::max_element(p.data.begin(), p.data.end());
  S sum = 0;
  for (S& v : p.data) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (S& v : p.data) v /= sum;
  return p;
}

/// -log p[target], with p clamped below at 1e-12.
template <typename S>
S cross_entropy(const TensorT<S>& probs, int target) {
  if (target < 0 || target >= probs.numel())
    throw std::invalid_argument("cross_entropy: target " + std::to_string(target) +
                                " out of range for " + probs.shape_str());
  S p = probs[static_cast<size_t>(target)];
  return -std::log(std::max(p, S(1e-12)));
}

/// d(cross_entropy)/d(logits) = p - onehot(target).
template <typename S>
TensorT<S> cross_entropy_grad_logits(const TensorT<S>& probs, int target) {
  TensorT<S> g = probs;
  g[static_cast<size_t>(target)] -= S(1);
  return g;
}

template <typename S>
S entropy(const TensorT<S>& probs) {
  S h = 0;
  for (S p : probs.data)
    if (p > S(0)) h -= p * std::log(p);
  return h;
}

/// dH/d(logits) for H = entropy(softmax(logits)): -p_j (log p_j + H).
template <typename S>
TensorT<S> entropy_grad_logits(const TensorT<S>& probs) {
  S h = entropy(probs);
  TensorT<S> g = probs;
  for (S& v : g.data) {
    S logp = std::log(std::max(v, S(1e-12)));
    v = -v * (logp + h);
  }
  return g;
}

/// Generic softmax backward: dz_i = p_i (dp_i - sum_j dp_j p_j).
template <typename S>
TensorT<S> softmax_backward(const TensorT<S>& probs, const TensorT<S>& grad_probs) {
  S dot = 0;
  for (size_t i = 0; i < probs.data.size(); ++i) dot += probs.data[i] * grad_probs.data[i];
  TensorT<S> dz = probs;
  for (size_t i = 0; i < probs.data.size(); ++i) dz.data[i] = probs.data[i] * (grad_probs.data[i] - dot);
  return dz;
}

}  // namespace gwla
