// Fast acceptance suite: every check prints one line and the process exits
// nonzero if any of them fails. Companion desk-scale checks live in
// acceptance_desk.cpp.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "gwla/blas.hpp"
#include "gwla/checkpoint.hpp"
#include "gwla/diagnostics.hpp"
#include "gwla/experiments.hpp"
#include "gwla/hypers.hpp"
#include "gwla/render.hpp"
#include "gwla/trainer.hpp"

using namespace gwla;

namespace {

int g_failures = 0;

void report(int number, const std::string& label, bool ok, const std::string& detail) {
  std::printf("criterion %2d (%s): %s -> %s\n", number, label.c_str(), detail.c_str(),
              ok ? "pass" : "fail");
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::filesystem::path scratch_dir() {
  auto p = std::filesystem::temp_directory_path() / "gwla_acceptance_fast";
  std::filesystem::create_directories(p);
  return p;
}

// Turn toward the point until the bearing error is under 20 degrees, then
// drive forward. Mirrors the stub policies used by the bias probes.
Action navigate_toward(const WorldState& st, double px, double py) {
  double desired = std::atan2(py - st.pose.y, px - st.pose.x);
  double err = std::remainder(desired - st.pose.heading, 2.0 * std::numbers::pi);
  if (std::fabs(err) > 0.35) return err > 0 ? Action::LookLeft : Action::LookRight;
  return Action::MoveForward;
}

struct EpisodeTrace {
  double reward = 0;
  int decisions = 0;
  Outcome outcome = Outcome::Ongoing;
  bool rewards_well_formed = true;  // zero until terminal, member of {-10,0,10}
};

template <typename PolicyFn>
EpisodeTrace run_episode(const World& world, const EpisodeSpec& spec, PolicyFn&& policy) {
  EpisodeTrace tr;
  WorldState st = world.reset(spec);
  while (!st.terminal) {
    StepResult sr = world.step(st, policy(st));
    bool member = sr.reward == -10.0 || sr.reward == 0.0 || sr.reward == 10.0;
    if (!member || (!sr.terminal && sr.reward != 0.0)) tr.rewards_well_formed = false;
    tr.reward += sr.reward;
    st = sr.next;
    tr.outcome = sr.outcome;
  }
  tr.decisions = st.decision_step;
  return tr;
}

void criterion_gradient_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  bool ok = true;
  std::string worst_block;
  for (Variant v : {Variant::Baseline, Variant::LayerwiseAttention}) {
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
      GradCheckResult r = agent_gradient_check(v, seed);
      ok = ok && r.passes(1e-5);
      if (r.max_rel_error > worst) {
        worst = r.max_rel_error;
        worst_block = std::string(variant_name(v)) + "/" + r.worst_param;
      }
    }
  }
  double secs = seconds_since(t0);
  ok = ok && secs < 300.0;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "both variants x 3 seeds, max rel err %.3g (at %s), %.1fs (budget 300s)", worst,
                worst_block.c_str(), secs);
  report(1, "gradient oracle", ok, buf);
}

void criterion_oracle_competence() {
  auto t0 = std::chrono::steady_clock::now();
  World world;
  RngStream rng(2024);
  const WordClass classes[5] = {WordClass::Shape, WordClass::Colour, WordClass::Pattern,
                                WordClass::Shade, WordClass::Direction};
  std::vector<std::vector<int>> pools;
  for (WordClass c : classes) pools.push_back(world.vocab().ids_of_class(c));

  double reward_sum = 0, decision_sum = 0;
  int correct = 0;
  const int episodes = 1000;
  for (int e = 0; e < episodes; ++e) {
    const std::vector<int>& pool = pools[static_cast<size_t>(e % 5)];
    int word = pool[static_cast<size_t>(rng.uniform_int(static_cast<int>(pool.size())))];
    EpisodeSpec spec = world.sample_episode(word, rng);
    EpisodeTrace tr = run_episode(world, spec,
                                  [&](const WorldState& st) { return world.scripted_oracle_policy(st); });
    reward_sum += tr.reward;
    decision_sum += tr.decisions;
    if (tr.outcome == Outcome::Correct) ++correct;
  }
  double mean_reward = reward_sum / episodes;
  double mean_len = decision_sum / episodes;
  double secs = seconds_since(t0);
  bool ok = mean_reward == 10.0 && correct == episodes && mean_len >= 30.0 && mean_len <= 80.0 &&
            secs < 120.0;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%d/%d correct over 5 word classes, mean reward %.4g, mean length %.1f "
                "(band [30,80]), %.1fs (budget 120s)",
                correct, episodes, mean_reward, mean_len, secs);
  report(2, "scripted oracle competence", ok, buf);
}

void criterion_reward_contract() {
  World world;
  RngStream rng(77);
  bool ok = true;
  std::string why = "bump/timeout mapping and {-10,0,+10} support hold";

  // Correct bump pays +10, wrong bump pays -10, both terminal.
  for (int e = 0; e < 50 && ok; ++e) {
    EpisodeSpec spec = world.sample_episode(rng.uniform_int(56), rng);
    EpisodeTrace to_t = run_episode(world, spec, [&](const WorldState& st) {
      return navigate_toward(st, st.spec.target.x, st.spec.target.y);
    });
    EpisodeTrace to_c = run_episode(world, spec, [&](const WorldState& st) {
      return navigate_toward(st, st.spec.confounder.x, st.spec.confounder.y);
    });
    if (!(to_t.rewards_well_formed && to_t.reward == 10.0 && to_t.outcome == Outcome::Correct &&
          to_t.decisions < world.config().max_decisions)) {
      ok = false;
      why = "target bump did not pay +10";
    }
    if (!(to_c.rewards_well_formed && to_c.reward == -10.0 && to_c.outcome == Outcome::Wrong)) {
      ok = false;
      why = "confounder bump did not pay -10";
    }
  }

  // Never bumping anything times out at exactly the decision cap with 0.
  for (int e = 0; e < 20 && ok; ++e) {
    EpisodeSpec spec = world.sample_episode(rng.uniform_int(56), rng);
    EpisodeTrace spin = run_episode(world, spec, [](const WorldState&) { return Action::LookLeft; });
    if (!(spin.rewards_well_formed && spin.reward == 0.0 && spin.outcome == Outcome::Timeout &&
          spin.decisions == world.config().max_decisions)) {
      ok = false;
      why = "timeout did not land at the decision cap with reward 0";
    }
  }

  // Random behaviour only ever sees the three contract values.
  for (int e = 0; e < 200 && ok; ++e) {
    EpisodeSpec spec = world.sample_episode(rng.uniform_int(56), rng);
    EpisodeTrace tr = run_episode(world, spec, [&](const WorldState&) {
      return static_cast<Action>(rng.uniform_int(kNumActions));
    });
    bool terminal_consistent = (tr.outcome == Outcome::Correct && tr.reward == 10.0) ||
                               (tr.outcome == Outcome::Wrong && tr.reward == -10.0) ||
                               (tr.outcome == Outcome::Timeout && tr.reward == 0.0);
    if (!tr.rewards_well_formed || !terminal_consistent) {
      ok = false;
      why = "random rollout left the reward contract";
    }
  }
  report(3, "reward contract", ok, why);
}

void criterion_attention_contract() {
  AgentConfig cfg = AgentConfig::make(Variant::LayerwiseAttention, 56, 84);
  AgentNet net(cfg);
  ParamStore params;
  RngStream rng(5);
  net.register_params(params, rng, 0.75);

  bool ok = cfg.attn_d == 530;
  double worst_sum_err = 0;
  for (int trial = 0; trial < 10; ++trial) {
    Tensor frame({3, 84, 84});
    for (auto& v : frame.data) v = static_cast<float>(rng.uniform());
    LstmState state = LstmState::zeros(cfg.lstm_width);
    auto fr = net.forward(params, frame, rng.uniform_int(56), state);
    ok = ok && fr.diag.attention.numel() == 530;
    double s = 0;
    for (float a : fr.diag.attention.data) s += a;
    worst_sum_err = std::max(worst_sum_err, std::fabs(s - 1.0));
  }
  ok = ok && worst_sum_err < 1e-5;

  // A zeroed word embedding must give exactly uniform attention, so the
  // per-layer masses collapse to location counts over 530.
  for (auto& v : params.block("lang.embed").value.data) v = 0.0f;
  Tensor frame({3, 84, 84});
  for (auto& v : frame.data) v = static_cast<float>(rng.uniform());
  LstmState state = LstmState::zeros(cfg.lstm_width);
  auto fr = net.forward(params, frame, 3, state);
  std::array<double, 3> mass = layer_mass(fr.diag.attention, cfg);
  const double expect[3] = {400.0 / 530.0, 81.0 / 530.0, 49.0 / 530.0};
  double worst_mass_err = 0;
  for (int i = 0; i < 3; ++i) worst_mass_err = std::max(worst_mass_err, std::fabs(mass[i] - expect[i]));
  float mn = fr.diag.attention[0], mx = fr.diag.attention[0];
  for (float a : fr.diag.attention.data) {
    mn = std::min(mn, a);
    mx = std::max(mx, a);
  }
  ok = ok && worst_mass_err < 1e-6 && (mx - mn) < 1e-9;

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "d=530, sum err %.2g (tol 1e-5); zero-embedding masses (%.4f, %.4f, %.4f), "
                "err %.2g (tol 1e-6)",
                worst_sum_err, mass[0], mass[1], mass[2], worst_mass_err);
  report(4, "attention distribution contract", ok, buf);
}

void criterion_curriculum_gate() {
  RngStream rng(31);
  int checked = 0, mismatches = 0, mastering = 0;
  for (int stream = 0; stream < 100; ++stream) {
    // Profiles: ramps that master, plateaus that never do, noisy cliffs.
    std::vector<double> rewards;
    int profile = stream % 3;
    double p = profile == 0 ? 0.5 : (profile == 1 ? 0.9 : 0.2);
    for (int t = 0; t < 5000; ++t) {
      if (profile == 0) p = std::min(1.0, p + 0.0004);
      if (profile == 2 && t == 2500) p = 1.0;
      double r = rng.uniform() < p ? 10.0 : (rng.uniform() < 0.3 ? -10.0 : 0.0);
      rewards.push_back(r);
    }

    long long oracle = -1;
    double window_sum = 0;
    for (size_t t = 0; t < rewards.size(); ++t) {
      window_sum += rewards[t];
      if (t >= 1000) window_sum -= rewards[t - 1000];
      if (t >= 999 && oracle < 0 && window_sum / 1000.0 >= 9.8)
        oracle = static_cast<long long>(t + 1);
    }

    MasteryTracker tracker;
    long long got = -1;
    for (double r : rewards)
      if (tracker.observe(r) && got < 0) got = tracker.trials();

    ++checked;
    if (got != oracle) ++mismatches;
    if (oracle > 0) ++mastering;
  }
  bool ok = mismatches == 0 && mastering > 0 && mastering < checked;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%d/%d streams agree with the brute-force window (%d mastering, %d never)",
                checked - mismatches, checked, mastering, checked - mastering);
  report(8, "curriculum mastery gate", ok, buf);
}

void criterion_bias_probe_stubs() {
  Vocabulary vocab;
  RngStream rng(99);
  BiasRegime regime = make_bias_regime(vocab, 8, 8, 1, rng);
  World world(WorldConfig{}, vocab);

  auto factory = [](bool to_target) {
    return PolicyFactory([to_target]() {
      return DecisionPolicy([to_target](const WorldState& st) {
        const ObjectInstance& o = to_target ? st.spec.target : st.spec.confounder;
        return navigate_toward(st, o.x, o.y);
      });
    });
  };
  BiasResult shape_score = run_bias_probe(factory(true), world, regime, 1000, rng);
  BiasResult colour_score = run_bias_probe(factory(false), world, regime, 1000, rng);

  auto rng_ptr = std::make_shared<RngStream>(13);
  BiasResult random_score = run_bias_probe(
      [rng_ptr]() {
        return DecisionPolicy(
            [rng_ptr](const WorldState&) { return static_cast<Action>(rng_ptr->uniform_int(kNumActions)); });
      },
      world, regime, 1000, rng);

  // Probing with a live network must not write to the parameters.
  RenderConfig rcfg;
  rcfg.side = 44;
  AgentConfig acfg = AgentConfig::make(Variant::LayerwiseAttention, vocab.size(), rcfg.side);
  AgentNet net(acfg);
  ParamStore params;
  RngStream prng(4);
  net.register_params(params, prng, 0.75);
  uint64_t before = value_hash(params);
  run_bias_probe(net, params, world, rcfg, regime, 20, rng);
  bool hash_ok = value_hash(params) == before;

  bool ok = shape_score.mean_score == 10.0 && colour_score.mean_score == -10.0 &&
            std::fabs(random_score.mean_score) < 3.0 && hash_ok;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "1000-episode probes: shape stub %+.3g, colour stub %+.3g, random %+.3g "
                "(|.| < 3); params hash %s",
                shape_score.mean_score, colour_score.mean_score, random_score.mean_score,
                hash_ok ? "unchanged" : "CHANGED");
  report(9, "ambiguous-word probe stubs", ok, buf);
}

TrainConfig repro_config(const std::string& dir, const std::string& name) {
  TrainConfig cfg;
  cfg.workers = 1;
  cfg.exclusive_updates = true;
  cfg.seed = 7;
  cfg.total_env_steps = 10000;
  cfg.unroll = 50;
  cfg.output_dir = dir;
  cfg.run_name = name;
  return cfg;
}

void criterion_reproducibility() {
  auto dir = scratch_dir();
  Vocabulary vocab;

  uint64_t hashes[2];
  for (int run = 0; run < 2; ++run) {
    Trainer tr(repro_config(dir.string(), "rep" + std::to_string(run)), vocab);
    tr.run();
    hashes[run] = tr.params_hash();
  }
  std::string log0 = read_file((dir / "rep0_train.csv").string());
  std::string log1 = read_file((dir / "rep1_train.csv").string());
  bool repro_ok = hashes[0] == hashes[1] && !log0.empty() && log0 == log1;

  // Checkpoint round trip: restored parameters drive bit-identical forwards.
  Trainer tr(repro_config(dir.string(), "rep_ck"), vocab);
  tr.run();
  ParamStore params = tr.params_copy();
  std::string ck = (dir / "rep_ck.gwla").string();
  save_checkpoint(ck, params, {{"env_step", 10000.0f}});

  AgentConfig acfg = tr.agent_config();
  AgentNet net(acfg);
  ParamStore restored;
  RngStream rng(1234);
  net.register_params(restored, rng, 0.75);  // layout only; values overwritten
  load_checkpoint(ck, restored);

  bool forward_ok = true;
  LstmState sa = LstmState::zeros(acfg.lstm_width);
  LstmState sb = LstmState::zeros(acfg.lstm_width);
  for (int t = 0; t < 5; ++t) {
    Tensor frame({3, acfg.frame_side, acfg.frame_side});
    for (auto& v : frame.data) v = static_cast<float>(rng.uniform());
    int word = rng.uniform_int(acfg.vocab_size);
    auto fa = net.forward(params, frame, word, sa);
    auto fb = net.forward(restored, frame, word, sb);
    sa = fa.state;
    sb = fb.state;
    forward_ok = forward_ok && fa.value == fb.value;
    for (int a = 0; a < acfg.num_actions; ++a)
      forward_ok = forward_ok && fa.probs[a] == fb.probs[a];
  }

  bool ok = repro_ok && forward_ok;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "10k-step single-worker reruns: hash %016llx vs %016llx, logs %s; "
                "checkpoint forwards %s",
                static_cast<unsigned long long>(hashes[0]),
                static_cast<unsigned long long>(hashes[1]),
                log0 == log1 ? "byte-identical" : "DIFFER",
                forward_ok ? "bit-exact" : "DIFFER");
  report(10, "exclusive-mode reproducibility", ok, buf);
}

void criterion_renderer_fidelity() {
  RenderConfig rcfg;  // 84px
  const int yaws = 12;
  const double distance = 2.2;
  const int dim = 3 * rcfg.side * rcfg.side;

  // Mean-centred, L2-normalized RGB correlation.  A single grey template per
  // view fails: dark palette colours flip the object/background contrast sign,
  // so the canonical set spans every palette prototype.
  auto feature = [dim](const Tensor& frame, float* out) {
    double mean = 0;
    for (float v : frame.data) mean += v;
    mean /= dim;
    double norm = 0;
    for (int i = 0; i < dim; ++i) {
      out[i] = frame.data[static_cast<size_t>(i)] - static_cast<float>(mean);
      norm += static_cast<double>(out[i]) * out[i];
    }
    float inv = 1.0f / std::sqrt(static_cast<float>(std::max(norm, 1e-12)));
    for (int i = 0; i < dim; ++i) out[i] *= inv;
  };
  auto frame_well_formed = [](const Tensor& frame) {
    if (frame.shape != std::vector<int>{3, 84, 84}) return false;
    for (float v : frame.data)
      if (!(v >= 0.0f && v <= 1.0f)) return false;
    return true;
  };

  bool frames_ok = true;
  const int n_templates = kNumShapes * yaws * kNumColours;
  std::vector<float> templates(static_cast<size_t>(n_templates) * dim);
  std::vector<int> template_shape(static_cast<size_t>(n_templates));
  int t = 0;
  for (int s = 0; s < kNumShapes; ++s)
    for (int k = 0; k < yaws; ++k)
      for (int c = 0; c < kNumColours; ++c, ++t) {
        double yaw = 2.0 * std::numbers::pi * k / yaws;
        Tensor frame = render_object_view(s, yaw, palette()[static_cast<size_t>(c)],
                                          Pattern::None, 1.0f, distance, rcfg);
        frames_ok = frames_ok && frame_well_formed(frame);
        feature(frame, templates.data() + static_cast<size_t>(t) * dim);
        template_shape[static_cast<size_t>(t)] = s;
      }

  RngStream rng(17);
  const int n_probes = kNumShapes * yaws;
  std::vector<float> probes(static_cast<size_t>(n_probes) * dim);
  std::vector<int> probe_shape(static_cast<size_t>(n_probes));
  int p = 0;
  for (int s = 0; s < kNumShapes; ++s)
    for (int k = 0; k < yaws; ++k, ++p) {
      double yaw = 2.0 * std::numbers::pi * k / yaws;
      Rgb colour = apply_colour(palette()[static_cast<size_t>(rng.uniform_int(kNumColours))], rng);
      Tensor frame = render_object_view(s, yaw, colour, Pattern::None, 1.0f, distance, rcfg);
      frames_ok = frames_ok && frame_well_formed(frame);
      feature(frame, probes.data() + static_cast<size_t>(p) * dim);
      probe_shape[static_cast<size_t>(p)] = s;
    }

  std::vector<float> scores(static_cast<size_t>(n_probes) * n_templates);
  gemm(false, true, n_probes, n_templates, dim, 1.0f, probes.data(), dim, templates.data(), dim,
       0.0f, scores.data(), n_templates);
  int hits = 0;
  for (int i = 0; i < n_probes; ++i) {
    const float* row = scores.data() + static_cast<size_t>(i) * n_templates;
    int best = static_cast<int>(std::max_element(row, row + n_templates) - row);
    if (template_shape[static_cast<size_t>(best)] == probe_shape[static_cast<size_t>(i)]) ++hits;
  }
  double acc = static_cast<double>(hits) / n_probes;
  bool ok = frames_ok && acc >= 0.95;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "frames 3x84x84 in [0,1]: %s; nearest canonical template (12 yaws x 10 colours) "
                "recovers shape id under colour noise %d/%d (%.1f%%)",
                frames_ok ? "yes" : "NO", hits, n_probes, 100.0 * acc);
  report(11, "renderer fidelity", ok, buf);
}

void criterion_hyperparameter_protocol() {
  RngStream rng(2718);
  const int draws = 100000;
  std::vector<double> lrs;
  lrs.reserve(draws);
  bool in_range = true;
  for (int i = 0; i < draws; ++i) {
    ReplicaHypers h = sample_replica_hyperparameters(rng);
    in_range = in_range && h.entropy_cost >= 0.0005 && h.entropy_cost <= 0.005 &&
               h.start_lr >= 0.0001 && h.start_lr <= 0.002 && h.embed_std >= 0.5 &&
               h.embed_std <= 1.0;
    lrs.push_back(h.start_lr);
  }
  std::nth_element(lrs.begin(), lrs.begin() + draws / 2, lrs.end());
  double median = lrs[draws / 2];
  const double expect = std::sqrt(0.0001 * 0.002);  // log-uniform midpoint
  bool median_ok = std::fabs(median - expect) / expect < 0.05;

  // Best-5-of-16 summary against a direct recomputation.
  std::vector<ReplicaReport> reports(16);
  for (int i = 0; i < 16; ++i) {
    reports[i].hypers = sample_replica_hyperparameters(rng);
    for (int t = 0; t < 30; ++t) reports[i].curve.push_back(rng.uniform(-10.0, 10.0));
    reports[i].final_score = reports[i].curve.back();
  }
  ReplicaSummary sum = summarize_replicas(reports);
  std::vector<size_t> order(16);
  for (size_t i = 0; i < 16; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return reports[a].final_score > reports[b].final_score;
  });
  bool summary_ok = sum.selected.size() == 5 && !sum.underfull && sum.mean.size() == 30;
  for (int i = 0; i < 5 && summary_ok; ++i) summary_ok = sum.selected[i] == order[i];
  for (size_t t = 0; t < sum.mean.size() && summary_ok; ++t) {
    double m = 0;
    for (size_t i : sum.selected) m += reports[i].curve[t];
    m /= 5.0;
    double sq = 0;
    for (size_t i : sum.selected) sq += (reports[i].curve[t] - m) * (reports[i].curve[t] - m);
    double se = std::sqrt(sq / 4.0) / std::sqrt(5.0);
    summary_ok = std::fabs(sum.mean[t] - m) < 1e-12 && std::fabs(sum.stderr_[t] - se) < 1e-12;
  }

  bool ok = in_range && median_ok && summary_ok;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%d draws in range: %s; lr median %.4g vs %.4g (5%% tol); best-5-of-16 summary %s",
                draws, in_range ? "yes" : "NO", median, expect,
                summary_ok ? "matches brute force" : "DIFFERS");
  report(12, "replica hyperparameter protocol", ok, buf);
}

}  // namespace

int main() {
  std::printf("fast acceptance checks (desk-scale training checks live in acceptance_desk)\n");
  criterion_gradient_oracle();
  criterion_oracle_competence();
  criterion_reward_contract();
  criterion_attention_contract();
  criterion_curriculum_gate();
  criterion_bias_probe_stubs();
  criterion_reproducibility();
  criterion_renderer_fidelity();
  criterion_hyperparameter_protocol();
  if (g_failures == 0) {
    std::printf("all fast acceptance checks passed\n");
    return 0;
  }
  std::printf("%d fast acceptance check(s) failed\n", g_failures);
  return 1;
}
