#pragma once

#include <deque>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gwla/trainer.hpp"

namespace gwla {

/// Tracks which words are "known": success rate >= threshold over the last
/// `window` exposures (a full window is required). Known flags are monotone.
class VocabTracker {
 public:
  explicit VocabTracker(int window = 50, double threshold = 0.95)
      : window_(window), threshold_(threshold) {}

  void observe(long long env_step, int word_id, bool success);

  int known_count() const { return known_count_; }
  bool is_known(int word_id) const;
  long long known_at(int word_id) const;  // -1 when not (yet) known
  /// (env_step, known count) at every increment.
  const std::vector<std::pair<long long, int>>& curve() const { return curve_; }

 private:
  struct WordStat {
    std::deque<bool> ring;
    int successes = 0;
    bool known = false;
    long long known_at = -1;
  };
  int window_;
  double threshold_;
  int known_count_ = 0;
  std::map<int, WordStat> stats_;
  std::vector<std::pair<long long, int>> curve_;
};

/// Acceleration measure of a vocabulary curve: maximum windowed slope over
/// the mean slope of the first quartile of learning (first crossing of 25%
/// of the total rise). 0 for flat or degenerate curves; ~1 for linear
/// growth; >> 1 for late spurts.
double spurt_statistic(const std::vector<std::pair<long long, int>>& curve);

/// Sliding-window mastery detector: fires once the last `window` rewards
/// average >= threshold (full window required).
class MasteryTracker {
 public:
  MasteryTracker(double threshold = 9.8, int window = 1000)
      : threshold_(threshold), window_(window) {}

  /// Returns true on the first trial at which mastery holds.
  bool observe(double reward);
  void reset();
  long long trials() const { return trials_; }
  bool mastered() const { return mastered_; }

 private:
  double threshold_;
  int window_;
  std::deque<double> ring_;
  double sum_ = 0;
  long long trials_ = 0;
  bool mastered_ = false;
};

/// Nested word subsets with a mastery gate between stages.
struct CurriculumSchedule {
  std::vector<int> stage_sizes = {2, 5, 10, 40};
  double mastery_threshold = 9.8;
  int mastery_window = 1000;
  std::vector<std::vector<int>> stages;  // nested word-id sets

  /// Random nested draws from the shape vocabulary, fixed by the stream.
  static CurriculumSchedule make(const Vocabulary& vocab, RngStream& rng,
                                 std::vector<int> sizes = {2, 5, 10, 40});
};

struct StageTransition {
  int from_stage = 0;
  int to_stage = 0;
  long long env_step = 0;
  long long stage_trials = 0;  // episodes inside the finished stage
};

struct CurriculumResult {
  std::vector<StageTransition> transitions;
  bool completed = false;  // final stage mastered before the budget ran out
  long long final_env_step = 0;
};

/// Drives a trainer through the schedule: words restricted to the current
/// stage, advancing on mastery (stage-local trial window).
CurriculumResult run_curriculum(Trainer& trainer, const CurriculumSchedule& schedule);

/// One training condition run until `target_known` words outside
/// `exclude_from_count` are known (or the step budget ends). `init_params`
/// seeds the shared store (layout-checked); null starts fresh.
struct ConditionRun {
  std::vector<std::pair<long long, int>> curve;  // (env_step, counted known words)
  long long steps_to_target = -1;
  long long episodes = 0;
  int final_known = 0;
};
ConditionRun train_until_known(const TrainConfig& cfg, const Vocabulary& vocab,
                               const std::vector<int>& words, int target_known,
                               const std::vector<int>& exclude_from_count,
                               const ParamStore* init_params);

struct CompareResult {
  ConditionRun pretrained;
  ConditionRun fresh;
};

/// Fig. 2A-style comparison: a checkpoint pretrained on `base_words`
/// continues on the extended set until `target_new` additional words are
/// known; a fresh agent runs until its first `target_new` words are known.
CompareResult run_pretraining_comparison(const TrainConfig& cfg, const Vocabulary& vocab,
                                         const std::vector<int>& base_words,
                                         const std::vector<int>& extended_words, int target_new,
                                         const ParamStore& pretrained_params);

/// Attribute reservations for the shape/colour-bias paradigm. Word lists
/// hold vocabulary ids; attribute pools hold class-local indices.
struct BiasRegime {
  std::vector<int> shape_words;
  std::vector<int> colour_words;
  std::vector<int> ambiguous_words;
  int reserved_shape = -1;   // s_a: ambiguous targets' shape, nowhere else
  int reserved_colour = -1;  // c_a: ambiguous targets' colour, nowhere else
  std::vector<int> heldout_shapes;   // probe-only shapes, never trained
  std::vector<int> heldout_colours;  // probe-only colours, never trained
  std::vector<int> training_shapes;  // everything episodes may use
  std::vector<int> training_colours;
};

/// Draws a regime and appends its nonce words to the vocabulary. Throws when
/// the reservations do not fit in the attribute spaces, naming the set.
BiasRegime make_bias_regime(Vocabulary& vocab, int n_shape_words, int n_colour_words,
                            int n_ambiguous, RngStream& rng, int n_heldout_shapes = -1,
                            int n_heldout_colours = -1);

/// Validates the regime's disjointness and returns a sampler drawing
/// uniformly over S + C + A words with the training-pool constraints.
EpisodeSampler build_bias_training_distribution(const BiasRegime& regime,
                                                const Vocabulary& vocab);

struct BiasResult {
  long long env_step = 0;
  double mean_score = 0;  // in [-10, 10]; + favours shape, - favours colour
  int episodes = 0;
};

/// Evaluation-only probe: ambiguous word with o1 = (s_a, held-out colour)
/// vs o2 = (held-out shape, c_a); +10 on the shape match, -10 on the colour
/// match, 0 on timeout. No parameter updates by construction.
using DecisionPolicy = std::function<Action(const WorldState&)>;
using PolicyFactory = std::function<DecisionPolicy()>;
BiasResult run_bias_probe(const PolicyFactory& make_policy, const World& world,
                          const BiasRegime& regime, int episodes, RngStream& rng);
/// Greedy-policy probe with fixed parameters.
BiasResult run_bias_probe(const AgentNet& net, const ParamStore& params, const World& world,
                          const RenderConfig& rcfg, const BiasRegime& regime, int episodes,
                          RngStream& rng);

struct BiasRunConfig {
  TrainConfig train;
  int shape_words = 8;
  int colour_words = 8;
  int ambiguous_words = 1;
  long long probe_every = 50000;  // env steps
  int probe_episodes = 1000;
};

struct BiasRunResult {
  BiasRegime regime;
  std::vector<BiasResult> probes;
  uint64_t params_hash_ok = 1;  // 1 iff every probe left parameters untouched
};

BiasRunResult run_bias_regime(const BiasRunConfig& cfg);
std::vector<BiasRunResult> run_bias_regimes(const std::vector<BiasRunConfig>& configs);

}  // namespace gwla
