#include "gwla/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gwla {

void VocabTracker::observe(long long env_step, int word_id, bool success) {
  WordStat& s = stats_[word_id];
  s.ring.push_back(success);
  if (success) ++s.successes;
  if (static_cast<int>(s.ring.size()) > window_) {
    if (s.ring.front()) --s.successes;
    s.ring.pop_front();
  }
  if (!s.known && static_cast<int>(s.ring.size()) == window_ &&
      static_cast<double>(s.successes) / window_ >= threshold_) {
    s.known = true;
    s.known_at = env_step;
    ++known_count_;
    curve_.emplace_back(env_step, known_count_);
  }
}

bool VocabTracker::is_known(int word_id) const {
  auto it = stats_.find(word_id);
  return it != stats_.end() && it->second.known;
}

long long VocabTracker::known_at(int word_id) const {
  auto it = stats_.find(word_id);
  return it != stats_.end() && it->second.known ? it->second.known_at : -1;
}

double spurt_statistic(const std::vector<std::pair<long long, int>>& curve) {
  const size_t n = curve.size();
  if (n < 2) return 0;
  const double rise = curve.back().second - curve.front().second;
  if (rise <= 0) return 0;

  const size_t w = std::max<size_t>(1, n / 20);
  double max_slope = 0;
  for (size_t i = 0; i + w < n; ++i) {
    double dx = static_cast<double>(curve[i + w].first - curve[i].first);
    double dy = curve[i + w].second - curve[i].second;
    if (dx > 0) max_slope = std::max(max_slope, dy / dx);
  }

  const double quartile_level = curve.front().second + 0.25 * rise;
  size_t q = 0;
  while (q < n && curve[q].second < quartile_level) ++q;
  if (q >= n) q = n - 1;
  double dx = static_cast<double>(curve[q].first - curve.front().first);
  double dy = curve[q].second - curve.front().second;
  if (dx <= 0 || dy <= 0) return 0;
  return max_slope / (dy / dx);
}

bool MasteryTracker::observe(double reward) {
  ++trials_;
  ring_.push_back(reward);
  sum_ += reward;
  if (static_cast<int>(ring_.size()) > window_) {
    sum_ -= ring_.front();
    ring_.pop_front();
  }
  if (!mastered_ && static_cast<int>(ring_.size()) == window_ && sum_ / window_ >= threshold_) {
    mastered_ = true;
    return true;
  }
  return false;
}

void MasteryTracker::reset() {
  ring_.clear();
  sum_ = 0;
  trials_ = 0;
  mastered_ = false;
}

CurriculumSchedule CurriculumSchedule::make(const Vocabulary& vocab, RngStream& rng,
                                            std::vector<int> sizes) {
  if (sizes.empty()) throw std::invalid_argument("curriculum: no stage sizes");
  for (size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] < sizes[i - 1])
      throw std::invalid_argument("curriculum: stage sizes must be nondecreasing");
  std::vector<int> pool = vocab.ids_of_class(WordClass::Shape);
  if (sizes.back() > static_cast<int>(pool.size()))
    throw std::invalid_argument("curriculum: final stage size " + std::to_string(sizes.back()) +
                                " exceeds shape vocabulary " + std::to_string(pool.size()));
  for (size_t i = pool.size(); i > 1; --i)
    std::swap(pool[i - 1], pool[static_cast<size_t>(rng.uniform_int(static_cast<int>(i)))]);

  CurriculumSchedule s;
  s.stage_sizes = sizes;
  for (int size : sizes) {
    if (size < 1) throw std::invalid_argument("curriculum: stage size must be positive");
    s.stages.emplace_back(pool.begin(), pool.begin() + size);
  }
  return s;
}

CurriculumResult run_curriculum(Trainer& trainer, const CurriculumSchedule& schedule) {
  if (schedule.stages.empty()) throw std::invalid_argument("run_curriculum: empty schedule");
  CurriculumResult res;
  std::mutex mu;
  int stage = 0;
  MasteryTracker tracker(schedule.mastery_threshold, schedule.mastery_window);
  std::atomic<bool> done{false};

  trainer.set_words(schedule.stages[0]);
  trainer.set_event_sink([&](const TrainEvent& ev) {
    std::lock_guard<std::mutex> lk(mu);
    if (done.load()) return;
    if (!tracker.observe(ev.reward)) return;
    StageTransition tr;
    tr.from_stage = stage;
    tr.to_stage = stage + 1;
    tr.env_step = ev.env_step;
    tr.stage_trials = tracker.trials();
    res.transitions.push_back(tr);
    if (stage + 1 < static_cast<int>(schedule.stages.size())) {
      ++stage;
      trainer.set_words(schedule.stages[static_cast<size_t>(stage)]);
      tracker.reset();
    } else {
      done = true;
      trainer.request_stop();
    }
  });
  trainer.run();
  res.completed = done.load();
  res.final_env_step = trainer.env_steps();
  return res;
}

ConditionRun train_until_known(const TrainConfig& cfg, const Vocabulary& vocab,
                               const std::vector<int>& words, int target_known,
                               const std::vector<int>& exclude_from_count,
                               const ParamStore* init_params) {
  Trainer trainer(cfg, vocab);
  if (init_params) trainer.load_params(*init_params);
  trainer.set_words(words);

  std::set<int> excluded(exclude_from_count.begin(), exclude_from_count.end());
  VocabTracker tracker;
  ConditionRun run;
  std::set<int> counted;
  std::mutex mu;
  std::atomic<bool> done{false};

  trainer.set_event_sink([&](const TrainEvent& ev) {
    std::lock_guard<std::mutex> lk(mu);
    if (done.load()) return;
    tracker.observe(ev.env_step, ev.word_id, ev.outcome == Outcome::Correct);
    ++run.episodes;
    if (tracker.is_known(ev.word_id) && !excluded.count(ev.word_id) &&
        counted.insert(ev.word_id).second) {
      run.curve.emplace_back(ev.env_step, static_cast<int>(counted.size()));
      if (static_cast<int>(counted.size()) >= target_known) {
        run.steps_to_target = ev.env_step;
        done = true;
        trainer.request_stop();
      }
    }
  });
  trainer.run();
  std::lock_guard<std::mutex> lk(mu);
  run.final_known = static_cast<int>(counted.size());
  return run;
}

CompareResult run_pretraining_comparison(const TrainConfig& cfg, const Vocabulary& vocab,
                                         const std::vector<int>& base_words,
                                         const std::vector<int>& extended_words, int target_new,
                                         const ParamStore& pretrained_params) {
  for (int b : base_words)
    if (std::find(extended_words.begin(), extended_words.end(), b) == extended_words.end())
      throw std::invalid_argument("pretraining comparison: base word " + vocab.word(b) +
                                  " missing from the extended set");
  CompareResult out;
  out.pretrained =
      train_until_known(cfg, vocab, extended_words, target_new, base_words, &pretrained_params);
  out.fresh = train_until_known(cfg, vocab, extended_words, target_new, {}, nullptr);
  return out;
}

namespace {

std::vector<int> shuffled_range(int n, RngStream& rng) {
  std::vector<int> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = i;
  for (size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[static_cast<size_t>(rng.uniform_int(static_cast<int>(i)))]);
  return v;
}

std::string join_ints(const std::vector<int>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

const char* nonce_name(int i) {
  static const char* names[] = {"dax", "blicket", "wug", "toma", "gazzer", "fep", "zav", "modi"};
  return i < 8 ? names[i] : nullptr;
}

}  // namespace

BiasRegime make_bias_regime(Vocabulary& vocab, int n_shape_words, int n_colour_words,
                            int n_ambiguous, RngStream& rng, int n_heldout_shapes,
                            int n_heldout_colours) {
  if (n_shape_words < 0 || n_colour_words < 0 || n_ambiguous < 1)
    throw std::invalid_argument("bias regime: counts must be nonnegative, ambiguous >= 1");
  if (n_heldout_shapes < 0) n_heldout_shapes = std::min(2, kNumShapes - n_shape_words - 1);
  if (n_heldout_colours < 0) n_heldout_colours = std::min(2, kNumColours - n_colour_words - 1);
  if (n_heldout_shapes < 1 || n_shape_words + 1 + n_heldout_shapes > kNumShapes)
    throw std::invalid_argument(
        "bias regime: shape reservations do not fit 40 shapes (|S|=" +
        std::to_string(n_shape_words) + ", reserved=1, held-out=" +
        std::to_string(n_heldout_shapes) + ")");
  if (n_heldout_colours < 1 || n_colour_words + 1 + n_heldout_colours > kNumColours)
    throw std::invalid_argument(
        "bias regime: colour reservations do not fit 10 colours (|C|=" +
        std::to_string(n_colour_words) + ", reserved=1, held-out=" +
        std::to_string(n_heldout_colours) + ")");

  BiasRegime r;
  std::vector<int> shapes = shuffled_range(kNumShapes, rng);
  std::vector<int> colours = shuffled_range(kNumColours, rng);
  size_t si = 0;
  for (int i = 0; i < n_shape_words; ++i) {
    int attr = shapes[si++];
    r.shape_words.push_back(vocab.id(Vocabulary::shape_words()[static_cast<size_t>(attr)]));
    r.training_shapes.push_back(attr);
  }
  r.reserved_shape = shapes[si++];
  for (int i = 0; i < n_heldout_shapes; ++i) r.heldout_shapes.push_back(shapes[si++]);
  while (si < shapes.size()) r.training_shapes.push_back(shapes[si++]);

  size_t ci = 0;
  for (int i = 0; i < n_colour_words; ++i) {
    int attr = colours[ci++];
    r.colour_words.push_back(vocab.id(Vocabulary::colour_words()[static_cast<size_t>(attr)]));
    r.training_colours.push_back(attr);
  }
  r.reserved_colour = colours[ci++];
  for (int i = 0; i < n_heldout_colours; ++i) r.heldout_colours.push_back(colours[ci++]);
  while (ci < colours.size()) r.training_colours.push_back(colours[ci++]);

  for (int i = 0; i < n_ambiguous; ++i) {
    const char* base = nonce_name(i);
    std::string name = base ? base : "nonce" + std::to_string(i);
    while (vocab.has(name)) name += "x";
    r.ambiguous_words.push_back(vocab.add_ambiguous(name, r.reserved_shape, r.reserved_colour));
  }
  return r;
}

EpisodeSampler build_bias_training_distribution(const BiasRegime& regime,
                                                const Vocabulary& vocab) {
  auto contains = [](const std::vector<int>& v, int x) {
    return std::find(v.begin(), v.end(), x) != v.end();
  };
  if (contains(regime.training_shapes, regime.reserved_shape))
    throw std::invalid_argument("bias distribution: reserved shape " +
                                std::to_string(regime.reserved_shape) +
                                " conflicts with training shapes {" +
                                join_ints(regime.training_shapes) + "}");
  if (contains(regime.training_colours, regime.reserved_colour))
    throw std::invalid_argument("bias distribution: reserved colour " +
                                std::to_string(regime.reserved_colour) +
                                " conflicts with training colours {" +
                                join_ints(regime.training_colours) + "}");
  for (int h : regime.heldout_shapes)
    if (contains(regime.training_shapes, h) || h == regime.reserved_shape)
      throw std::invalid_argument("bias distribution: held-out shape " + std::to_string(h) +
                                  " conflicts with training/reserved shapes {" +
                                  join_ints(regime.training_shapes) + "}");
  for (int h : regime.heldout_colours)
    if (contains(regime.training_colours, h) || h == regime.reserved_colour)
      throw std::invalid_argument("bias distribution: held-out colour " + std::to_string(h) +
                                  " conflicts with training/reserved colours {" +
                                  join_ints(regime.training_colours) + "}");
  for (int w : regime.shape_words)
    if (!contains(regime.training_shapes, vocab.attr(w)))
      throw std::invalid_argument("bias distribution: shape word '" + vocab.word(w) +
                                  "' has no training attribute");
  for (int w : regime.colour_words)
    if (!contains(regime.training_colours, vocab.attr(w)))
      throw std::invalid_argument("bias distribution: colour word '" + vocab.word(w) +
                                  "' has no training attribute");
  for (int w : regime.ambiguous_words)
    if (vocab.ambiguous_shape(w) != regime.reserved_shape ||
        vocab.ambiguous_colour(w) != regime.reserved_colour)
      throw std::invalid_argument("bias distribution: ambiguous word '" + vocab.word(w) +
                                  "' does not use the reserved pairing");

  std::vector<int> words;
  words.insert(words.end(), regime.shape_words.begin(), regime.shape_words.end());
  words.insert(words.end(), regime.colour_words.begin(), regime.colour_words.end());
  words.insert(words.end(), regime.ambiguous_words.begin(), regime.ambiguous_words.end());
  if (words.empty()) throw std::invalid_argument("bias distribution: no words to train");
  EpisodeConstraints constraints;
  constraints.allowed_shapes = regime.training_shapes;
  constraints.allowed_colours = regime.training_colours;

  return [words, constraints](const World& world, RngStream& rng) {
    int w = words[static_cast<size_t>(rng.uniform_int(static_cast<int>(words.size())))];
    return world.sample_episode(w, rng, constraints);
  };
}

BiasResult run_bias_probe(const PolicyFactory& make_policy, const World& world,
                          const BiasRegime& regime, int episodes, RngStream& rng) {
  if (regime.ambiguous_words.empty() || regime.heldout_shapes.empty() ||
      regime.heldout_colours.empty())
    throw std::invalid_argument("bias probe: regime lacks ambiguous words or held-out pools");
  BiasResult res;
  for (int e = 0; e < episodes; ++e) {
    int word = regime.ambiguous_words[static_cast<size_t>(
        rng.uniform_int(static_cast<int>(regime.ambiguous_words.size())))];
    ObjectInstance shape_match;  // o1: reserved shape, never-seen colour
    shape_match.shape_id = regime.reserved_shape;
    int hc = regime.heldout_colours[static_cast<size_t>(
        rng.uniform_int(static_cast<int>(regime.heldout_colours.size())))];
    shape_match.base_colour = apply_colour(palette()[static_cast<size_t>(hc)], rng);
    ObjectInstance colour_match;  // o2: never-seen shape, reserved colour
    colour_match.shape_id = regime.heldout_shapes[static_cast<size_t>(
        rng.uniform_int(static_cast<int>(regime.heldout_shapes.size())))];
    colour_match.base_colour =
        apply_colour(palette()[static_cast<size_t>(regime.reserved_colour)], rng);

    EpisodeSpec spec = world.assemble_episode(word, shape_match, colour_match, rng);
    DecisionPolicy policy = make_policy();
    WorldState st = world.reset(spec);
    double reward = 0;
    while (!st.terminal) {
      StepResult sr = world.step(st, policy(st));
      reward += sr.reward;
      st = sr.next;
    }
    res.mean_score += reward;
    ++res.episodes;
  }
  if (res.episodes) res.mean_score /= res.episodes;
  return res;
}

BiasResult run_bias_probe(const AgentNet& net, const ParamStore& params, const World& world,
                          const RenderConfig& rcfg, const BiasRegime& regime, int episodes,
                          RngStream& rng) {
  PolicyFactory factory = [&]() -> DecisionPolicy {
    auto lstm = std::make_shared<LstmState>(LstmState::zeros(net.config().lstm_width));
    return [&, lstm](const WorldState& st) {
      Tensor frame = render(st, world.config(), rcfg);
      ForwardResultT<float> fwd = net.forward(params, frame, st.spec.word_id, *lstm);
      *lstm = std::move(fwd.state);
      return static_cast<Action>(greedy_action_index(fwd.probs));
    };
  };
  return run_bias_probe(factory, world, regime, episodes, rng);
}

BiasRunResult run_bias_regime(const BiasRunConfig& cfg) {
  Vocabulary vocab;
  RngStream rng(cfg.train.seed * 0x9E3779B97F4A7C15ULL + 17);
  BiasRunResult out;
  out.regime = make_bias_regime(vocab, cfg.shape_words, cfg.colour_words, cfg.ambiguous_words,
                                rng);
  Trainer trainer(cfg.train, vocab);
  trainer.set_episode_sampler(build_bias_training_distribution(out.regime, vocab));
  World probe_world(cfg.train.world, vocab);
  AgentNet net(trainer.agent_config());
  RngStream probe_rng = rng.split(77);

  trainer.start();
  long long next_probe = cfg.probe_every > 0 ? cfg.probe_every : cfg.train.total_env_steps;
  while (trainer.env_steps() < cfg.train.total_env_steps) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    if (trainer.env_steps() >= next_probe && trainer.env_steps() < cfg.train.total_env_steps) {
      trainer.request_pause();
      uint64_t h0 = trainer.params_hash();
      ParamStore snap = trainer.params_copy();
      BiasResult r = run_bias_probe(net, snap, probe_world, cfg.train.render, out.regime,
                                    cfg.probe_episodes, probe_rng);
      r.env_step = trainer.env_steps();
      if (trainer.params_hash() != h0) out.params_hash_ok = 0;
      out.probes.push_back(r);
      trainer.resume();
      next_probe += cfg.probe_every;
    }
  }
  trainer.join();

  ParamStore snap = trainer.params_copy();
  BiasResult final_probe = run_bias_probe(net, snap, probe_world, cfg.train.render, out.regime,
                                          cfg.probe_episodes, probe_rng);
  final_probe.env_step = trainer.env_steps();
  out.probes.push_back(final_probe);
  return out;
}

std::vector<BiasRunResult> run_bias_regimes(const std::vector<BiasRunConfig>& configs) {
  std::vector<BiasRunResult> out;
  out.reserve(configs.size());
  for (const auto& c : configs) out.push_back(run_bias_regime(c));
  return out;
}

}  // namespace gwla
