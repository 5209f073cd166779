#include <cmath>
#include <set>

#include "doctest.h"
#include "gwla/checkpoint.hpp"
#include "gwla/gradcheck.hpp"
#include "gwla/ops.hpp"
#include "gwla/optim.hpp"
#include "gwla/param_store.hpp"
#include "gwla/rng.hpp"
#include "gwla/tensor.hpp"

using namespace gwla;

TEST_CASE("tensor shape and construction") {
  Tensor t({2, 3});
  CHECK(t.numel() == 6);
  CHECK(t.rank() == 2);
  for (float v : t.data) CHECK(v == 0.0f);
  CHECK_THROWS_AS(Tensor({2, -1}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0f, 2.0f, 3.0f}), std::invalid_argument);
  CHECK(shape_to_string({3, 84, 84}) == "(3,84,84)");
}

TEST_CASE("rng determinism and stream independence") {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());

  RngStream base(7);
  RngStream s1 = base.split(1), s2 = base.split(2);
  int agree = 0;
  for (int i = 0; i < 1000; ++i)
    if (std::fabs(s1.uniform() - s2.uniform()) < 1e-3) ++agree;
  CHECK(agree < 50);  // split streams are effectively unrelated
}

TEST_CASE("rng ranges") {
  RngStream r(3);
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform(2.0, 5.0);
    CHECK(u >= 2.0);
    CHECK(u < 5.0);
    int k = r.uniform_int(7);
    CHECK(k >= 0);
    CHECK(k < 7);
    double lg = r.log_uniform(1e-4, 2e-3);
    CHECK(lg >= 1e-4);
    CHECK(lg <= 2e-3);
  }
}

TEST_CASE("rng uniform_int covers all values roughly evenly") {
  RngStream r(11);
  int counts[7] = {0};
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[r.uniform_int(7)];
  double chi2 = 0, expect = n / 7.0;
  for (int c : counts) chi2 += (c - expect) * (c - expect) / expect;
  CHECK(chi2 < 22.5);  // chi-square(6), p ~ 0.001
}

TEST_CASE("rng normal moments") {
  RngStream r(5);
  double sum = 0, sq = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double v = r.normal();
    sum += v;
    sq += v * v;
  }
  double mean = sum / n, var = sq / n - mean * mean;
  CHECK(std::fabs(mean) < 0.02);
  CHECK(std::fabs(var - 1.0) < 0.05);
}

TEST_CASE("conv output size ladder") {
  CHECK(conv_out_size(84, 8, 4) == 20);
  CHECK(conv_out_size(20, 4, 2) == 9);
  CHECK(conv_out_size(9, 3, 1) == 7);
  CHECK(conv_out_size(44, 8, 4) == 10);
  CHECK(conv_out_size(10, 4, 2) == 4);
  CHECK(conv_out_size(4, 3, 1) == 2);
}

TEST_CASE("conv2d against a hand-computed window") {
  Tensor input({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  Tensor kernel({1, 1, 2, 2}, {1, 2, 3, 4});
  Tensor bias({1}, {0.5f});
  Tensor out = conv2d(input, kernel, bias, 1);
  REQUIRE(out.shape == std::vector<int>{1, 2, 2});
  CHECK(out[0] == doctest::Approx(37.5));
  CHECK(out[1] == doctest::Approx(47.5));
  CHECK(out[2] == doctest::Approx(67.5));
  CHECK(out[3] == doctest::Approx(77.5));
}

TEST_CASE("conv2d stride and multichannel") {
  // Two input channels summed; stride 2 picks non-overlapping windows.
  Tensor input({2, 4, 4});
  for (int i = 0; i < 16; ++i) {
    input.data[i] = static_cast<float>(i);
    input.data[16 + i] = 1.0f;
  }
  Tensor kernel({1, 2, 2, 2});
  kernel.data = {1, 1, 1, 1, 0, 0, 0, 1};  // sum of 1st-channel window + one 2nd-channel tap
  Tensor bias({1});
  Tensor out = conv2d(input, kernel, bias, 2);
  REQUIRE(out.shape == std::vector<int>{1, 2, 2});
  CHECK(out[0] == doctest::Approx(0 + 1 + 4 + 5 + 1));
  CHECK(out[1] == doctest::Approx(2 + 3 + 6 + 7 + 1));
  CHECK(out[2] == doctest::Approx(8 + 9 + 12 + 13 + 1));
  CHECK(out[3] == doctest::Approx(10 + 11 + 14 + 15 + 1));
}

TEST_CASE("linear against hand computation") {
  Tensor x({3}, {1, 2, 3});
  Tensor w({2, 3}, {1, 0, -1, 0.5f, 0.5f, 0.5f});
  Tensor b({2}, {10, -10});
  Tensor y = linear(x, w, b);
  REQUIRE(y.numel() == 2);
  CHECK(y[0] == doctest::Approx(1 - 3 + 10));
  CHECK(y[1] == doctest::Approx(3 - 10));
}

TEST_CASE("relu and its mask") {
  Tensor x({4}, {-1, 0, 2, -3});
  Tensor y = relu(x);
  CHECK(y[0] == 0);
  CHECK(y[1] == 0);
  CHECK(y[2] == 2);
  CHECK(y[3] == 0);
  Tensor g({4}, {1, 1, 1, 1});
  relu_backward(x, g);
  CHECK(g[0] == 0);
  CHECK(g[1] == 0);
  CHECK(g[2] == 1);
  CHECK(g[3] == 0);
}

TEST_CASE("softmax properties") {
  Tensor z({4}, {1, 2, 3, 4});
  Tensor p = softmax(z);
  double sum = 0;
  for (float v : p.data) {
    CHECK(v > 0);
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(p[3] > p[2]);

  // Shift invariance.
  Tensor zs({4}, {101, 102, 103, 104});
  Tensor ps = softmax(zs);
  for (int i = 0; i < 4; ++i) CHECK(ps[i] == doctest::Approx(p[i]).epsilon(1e-6));

  // Large logits stay finite.
  Tensor big({3}, {1000, 999, -1000});
  Tensor pb = softmax(big);
  for (float v : pb.data) CHECK(std::isfinite(v));
}

TEST_CASE("entropy of the uniform distribution") {
  Tensor p({8});
  p.fill(0.125f);
  CHECK(entropy(p) == doctest::Approx(std::log(8.0)).epsilon(1e-6));
  Tensor q({3});
  q.fill(1.0f / 3.0f);
  CHECK(entropy(q) == doctest::Approx(1.0986123).epsilon(1e-5));

  // Entropy gradient of the uniform distribution is zero (stationary point).
  Tensor g = entropy_grad_logits(p);
  for (float v : g.data) CHECK(std::fabs(v) < 1e-6);
}

TEST_CASE("cross entropy clamps tiny probabilities") {
  Tensor p({2}, {1.0f, 0.0f});
  double ce = cross_entropy(p, 1);
  CHECK(std::isfinite(ce));
  CHECK(ce == doctest::Approx(-std::log(1e-12)).epsilon(1e-3));
  CHECK(cross_entropy(Tensor({2}, {0.5f, 0.5f}), 0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("lstm step matches the gate equations") {
  // Width 1, input 1: everything computable by hand with the [i,f,g,o]
  // gate order and a single (4H, X+H) weight.
  Tensor w({4, 2}, {0.5f, 0.25f, -0.3f, 0.1f, 1.0f, -0.5f, 0.2f, 0.4f});
  Tensor b({4}, {0.1f, 1.0f, 0.0f, -0.2f});
  Tensor x({1}, {0.5f});
  Tensor h0({1}, {0.2f});
  Tensor c0({1}, {-0.3f});
  Tensor h1({1}), c1({1});
  lstm_step(x, h0, c0, w, b, h1, c1);

  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  double i = sig(0.5 * 0.5 + 0.25 * 0.2 + 0.1);
  double f = sig(-0.3 * 0.5 + 0.1 * 0.2 + 1.0);
  double g = std::tanh(1.0 * 0.5 - 0.5 * 0.2 + 0.0);
  double o = sig(0.2 * 0.5 + 0.4 * 0.2 - 0.2);
  double c = f * -0.3 + i * g;
  double h = o * std::tanh(c);
  CHECK(c1[0] == doctest::Approx(c).epsilon(1e-5));
  CHECK(h1[0] == doctest::Approx(h).epsilon(1e-5));
}

TEST_CASE("lstm state carries information") {
  RngStream rng(9);
  int X = 4, H = 3;
  Tensor w({4 * H, X + H});
  for (auto& v : w.data) v = static_cast<float>(rng.uniform(-0.5, 0.5));
  Tensor b({4 * H});
  Tensor x({X}, {0.1f, -0.2f, 0.3f, 0.0f});
  Tensor h0({H}), c0({H});
  Tensor ha({H}), ca({H}), hb({H}), cb({H});
  lstm_step(x, h0, c0, w, b, ha, ca);
  Tensor c0b({H}, {1.0f, -1.0f, 0.5f});
  lstm_step(x, h0, c0b, w, b, hb, cb);
  bool differs = false;
  for (int i = 0; i < H; ++i)
    if (ha[i] != hb[i]) differs = true;
  CHECK(differs);
}

TEST_CASE("embedding lookup and gradient scatter") {
  Tensor table({3, 2}, {1, 2, 3, 4, 5, 6});
  Tensor row = embedding_lookup(1, table);
  CHECK(row[0] == 3);
  CHECK(row[1] == 4);
  CHECK_THROWS_AS(embedding_lookup(3, table), std::invalid_argument);

  Tensor gtab({3, 2});
  Tensor grow({2}, {0.5f, -0.5f});
  embedding_backward(1, grow, gtab);
  embedding_backward(1, grow, gtab);  // accumulates
  CHECK(gtab[2] == doctest::Approx(1.0));
  CHECK(gtab[3] == doctest::Approx(-1.0));
  CHECK(gtab[0] == 0);
  CHECK(gtab[5] == 0);
}

TEST_CASE("param store layout and hashing") {
  ParamStore s;
  s.add("a", Tensor({2, 2}, {1, 2, 3, 4}));
  s.add("b", Tensor({3}));
  CHECK(s.total_params() == 7);
  CHECK_THROWS_AS(s.add("a", Tensor({1})), std::invalid_argument);
  CHECK_THROWS_AS(s.value("missing"), std::invalid_argument);

  uint64_t h0 = value_hash(s);
  s.block("b").value[0] = 1.0f;
  CHECK(value_hash(s) != h0);

  ParamStore other;
  other.add("a", Tensor({2, 2}));
  CHECK_THROWS_AS(other.copy_values_from(s), std::invalid_argument);
  other.add("b", Tensor({3}));
  other.copy_values_from(s);
  CHECK(value_hash(other) == value_hash(s));
}

TEST_CASE("global grad norm and clipping") {
  ParamStore s;
  s.add("a", Tensor({2}));
  s.add("b", Tensor({1}));
  s.block("a").grad.data = {3, 0};
  s.block("b").grad.data = {4};
  CHECK(s.global_grad_norm() == doctest::Approx(5.0));

  double pre = clip_global_norm(s, 1.0);
  CHECK(pre == doctest::Approx(5.0));
  CHECK(s.global_grad_norm() == doctest::Approx(1.0));

  // Idempotent once within the limit.
  auto saved = s.block("a").grad.data;
  clip_global_norm(s, 1.0);
  CHECK(s.block("a").grad.data[0] == doctest::Approx(saved[0]));

  s.block("a").grad.data = {0.3f, 0};
  s.block("b").grad.data = {0.4f};
  clip_global_norm(s, 1.0);  // below the limit: untouched
  CHECK(s.block("b").grad.data[0] == doctest::Approx(0.4f));
}

TEST_CASE("rmsprop first step against the closed form") {
  ParamStore s;
  s.add("w", Tensor({1}, {1.0f}));
  s.block("w").grad.data = {1.0f};
  rmsprop_update(s, 0.001f, 0.99f, 0.1f);
  // ms = 0.01, step = lr / sqrt(0.01 + 0.1) = 0.001 * 3.0151134
  CHECK(s.value("w")[0] == doctest::Approx(1.0 - 0.0030151134).epsilon(1e-6));
  CHECK(s.block("w").grad[0] == 0.0f);  // consumed
}

TEST_CASE("shared store rmsprop matches the single-threaded update") {
  ParamStore init;
  init.add("w", Tensor({2}, {1.0f, -2.0f}));

  ParamStore grads;
  grads.add("w", Tensor({2}));
  grads.block("w").grad.data = {0.5f, -0.25f};

  ParamStore ref = init;
  ref.block("w").grad.data = {0.5f, -0.25f};
  rmsprop_update(ref, 0.01f, 0.99f, 0.1f);

  SharedParamStore shared(init, false);
  shared.apply_rmsprop(grads, 0.01f, 0.99f, 0.1f);
  ParamStore got = shared.copy();
  CHECK(got.value("w")[0] == doctest::Approx(ref.value("w")[0]));
  CHECK(got.value("w")[1] == doctest::Approx(ref.value("w")[1]));
}

TEST_CASE("lr schedule anneals linearly to zero") {
  CHECK(lr_schedule(1.0f, 0, 100) == doctest::Approx(1.0));
  CHECK(lr_schedule(1.0f, 50, 100) == doctest::Approx(0.5));
  CHECK(lr_schedule(1.0f, 100, 100) == 0.0f);
  CHECK(lr_schedule(1.0f, 150, 100) == 0.0f);
}

TEST_CASE("checkpoint round trip is bit exact") {
  RngStream rng(21);
  ParamStore s;
  s.add("layer.w", Tensor({4, 3}));
  s.add("layer.b", Tensor({4}));
  for (auto& b : s.blocks)
    for (auto& v : b.value.data) v = static_cast<float>(rng.uniform(-2, 2));

  std::string path = "tensorcore_ckpt_test.gwla";
  save_checkpoint(path, s, {{"env_step", 123.0f}});

  ParamStore t;
  t.add("layer.w", Tensor({4, 3}));
  t.add("layer.b", Tensor({4}));
  auto meta = load_checkpoint(path, t);
  CHECK(meta.at("env_step") == 123.0f);
  CHECK(value_hash(t) == value_hash(s));

  ParamStore wrong;
  wrong.add("layer.w", Tensor({3, 4}));
  wrong.add("layer.b", Tensor({4}));
  CHECK_THROWS(load_checkpoint(path, wrong));

  // Corruption is rejected.
  {
    std::ofstream f(path, std::ios::binary);
    f << "not a checkpoint at all";
  }
  ParamStore u;
  u.add("layer.w", Tensor({4, 3}));
  u.add("layer.b", Tensor({4}));
  CHECK_THROWS(load_checkpoint(path, u));
  std::remove(path.c_str());
}

TEST_CASE("finite differences validate op-level gradients") {
  // Composite: loss = CE(softmax(W2 * relu(W1 x + b1) + b2), label).
  RngStream rng(13);
  ParamStoreD p;
  p.add("w1", TensorD({5, 4}));
  p.add("b1", TensorD({5}));
  p.add("w2", TensorD({3, 5}));
  p.add("b2", TensorD({3}));
  for (auto& b : p.blocks)
    for (auto& v : b.value.data) v = rng.uniform(-0.8, 0.8);
  TensorD x({4}, {0.3, -0.7, 0.5, 0.1});
  const int label = 2;

  auto loss_fn = [&](const ParamStoreD& q) {
    TensorD h = relu(linear(x, q.value("w1"), q.value("b1")));
    TensorD probs = softmax(linear(h, q.value("w2"), q.value("b2")));
    return cross_entropy(probs, label);
  };

  ParamStoreD a = p;
  a.zero_grads();
  {
    TensorD pre = linear(x, a.value("w1"), a.value("b1"));
    TensorD h = relu(pre);
    TensorD probs = softmax(linear(h, a.value("w2"), a.value("b2")));
    TensorD dlogits = cross_entropy_grad_logits(probs, label);
    TensorD dh;
    linear_backward(h, a.value("w2"), dlogits, a.grad("w2"), a.grad("b2"), &dh);
    relu_backward(pre, dh);
    linear_backward(x, a.value("w1"), dh, a.grad("w1"), a.grad("b1"));
  }
  auto res = finite_difference_check(p, a, loss_fn, all_coords(p));
  CHECK(res.passes(1e-7));
}

TEST_CASE("conv gradients pass finite differences") {
  RngStream rng(17);
  ParamStoreD p;
  p.add("k", TensorD({2, 2, 3, 3}));
  p.add("b", TensorD({2}));
  for (auto& b : p.blocks)
    for (auto& v : b.value.data) v = rng.uniform(-0.5, 0.5);
  TensorD x({2, 6, 6});
  for (auto& v : x.data) v = rng.uniform(-1, 1);

  auto loss_fn = [&](const ParamStoreD& q) {
    TensorD y = conv2d(x, q.value("k"), q.value("b"), 2);
    double s = 0;
    for (size_t i = 0; i < y.data.size(); ++i) s += y.data[i] * y.data[i];
    return 0.5 * s;
  };

  ParamStoreD a = p;
  a.zero_grads();
  {
    TensorD y = conv2d(x, a.value("k"), a.value("b"), 2);
    TensorD dy = y;  // dLoss/dy = y
    TensorD dx;
    conv2d_backward(x, a.value("k"), 2, dy, a.grad("k"), a.grad("b"), &dx);
  }
  auto res = finite_difference_check(p, a, loss_fn, all_coords(p));
  CHECK(res.passes(1e-7));
}

TEST_CASE("lstm gradients pass finite differences") {
  RngStream rng(19);
  const int X = 3, H = 2;
  ParamStoreD p;
  p.add("w", TensorD({4 * H, X + H}));
  p.add("b", TensorD({4 * H}));
  for (auto& b : p.blocks)
    for (auto& v : b.value.data) v = rng.uniform(-0.6, 0.6);
  TensorD x({X}, {0.4, -0.2, 0.9});
  TensorD h0({H}, {0.1, -0.3});
  TensorD c0({H}, {0.2, 0.5});

  auto loss_fn = [&](const ParamStoreD& q) {
    TensorD h1({H}), c1({H});
    lstm_step(x, h0, c0, q.value("w"), q.value("b"), h1, c1);
    double s = 0;
    for (int i = 0; i < H; ++i) s += h1[i] * h1[i] + 0.5 * c1[i] * c1[i];
    return s;
  };

  ParamStoreD a = p;
  a.zero_grads();
  {
    TensorD h1({H}), c1({H});
    LstmCache<double> cache;
    lstm_step(x, h0, c0, a.value("w"), a.value("b"), h1, c1, &cache);
    TensorD dh({H}), dc({H});
    for (int i = 0; i < H; ++i) {
      dh[i] = 2.0 * h1[i];
      dc[i] = c1[i];
    }
    TensorD dx, dh0, dc0;
    lstm_step_backward(cache, a.value("w"), dh, dc, a.grad("w"), a.grad("b"), dx, dh0, dc0);
  }
  auto res = finite_difference_check(p, a, loss_fn, all_coords(p));
  CHECK(res.passes(1e-7));
}
