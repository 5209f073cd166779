#pragma once

#include <atomic>
#include <chrono>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "gwla/agent.hpp"
#include "gwla/render.hpp"
#include "gwla/replay.hpp"
#include "gwla/world.hpp"

namespace gwla {

struct TrainConfig {
  Variant variant = Variant::LayerwiseAttention;
  int workers = 16;
  uint64_t seed = 1;
  long long total_env_steps = 1000000;  // micro-steps (decisions x action repeat)
  int unroll = 50;
  double gamma = 0.99;
  double cost_base = 0.5;  // multiplies the full gradient before clipping
  double clip_norm = 100.0;
  double rmsprop_decay = 0.99;
  double rmsprop_eps = 0.1;
  double start_lr = 0.001;      // annealed linearly to 0 at the step budget
  double entropy_cost = 0.003;  // beta
  double embed_std = 0.75;
  bool aux_enabled = true;
  double aux_weight = 1.0;
  int aux_batch = 32;
  size_t replay_capacity = 2048;
  bool exclusive_updates = false;  // serialize updates for determinism
  long long checkpoint_every = 0;  // env steps between checkpoints; 0 = final only
  std::string output_dir;          // empty: no file artifacts
  std::string run_name = "run";
  WorldConfig world;
  RenderConfig render;
};

/// One finished training episode, as consumed by trackers and logs.
struct TrainEvent {
  long long episode = 0;
  long long env_step = 0;
  int worker = 0;
  int word_id = 0;
  std::string word;
  Outcome outcome = Outcome::Ongoing;
  double reward = 0;
  int decisions = 0;
  double policy_loss = 0, value_loss = 0, entropy = 0, aux_loss = 0;
};

using EventSink = std::function<void(const TrainEvent&)>;
using EpisodeSampler = std::function<EpisodeSpec(const World&, RngStream&)>;

/// Asynchronous trainer: N worker threads, each with a private environment
/// and parameter snapshot, updating a shared store. Words/constraints can be
/// swapped mid-run (workers pick up the change at their next episode);
/// probes pause workers at episode boundaries via request_pause().
class Trainer {
 public:
  Trainer(TrainConfig cfg, Vocabulary vocab);
  ~Trainer();

  const TrainConfig& config() const { return cfg_; }
  const AgentConfig& agent_config() const { return agent_cfg_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  SharedParamStore& shared() { return *shared_; }
  ReplayBuffer& replay() { return replay_; }

  void set_words(std::vector<int> word_ids);
  void set_constraints(EpisodeConstraints constraints);
  void set_episode_sampler(EpisodeSampler sampler);  // overrides words/constraints
  void set_event_sink(EventSink sink);

  void start();
  void join();
  void run() {
    start();
    join();
  }
  void request_stop();
  /// Blocks until every live worker is parked at an episode boundary.
  void request_pause();
  void resume();

  long long env_steps() const { return env_steps_.load(); }
  long long episodes() const { return episodes_.load(); }
  double current_lr() const;
  uint64_t params_hash() { return shared_->hash(); }
  ParamStore params_copy() { return shared_->copy(); }
  void load_params(const ParamStore& p) { shared_->load(p); }
  long long faults() const { return faults_.load(); }

 private:
  struct Distribution {
    std::vector<int> words;
    EpisodeConstraints constraints;
    EpisodeSampler sampler;
  };

  void worker_loop(int wid);
  bool run_training_episode(int wid, World& world, const AgentNet& net, ParamStore& local,
                            RngStream& rng, const EpisodeSpec& spec);
  void honor_pause();
  std::shared_ptr<const Distribution> distribution() const;
  void emit(TrainEvent ev);
  void maybe_checkpoint(int wid);
  std::string artifact_path(const std::string& leaf) const;

  TrainConfig cfg_;
  Vocabulary vocab_;
  AgentConfig agent_cfg_;
  std::unique_ptr<SharedParamStore> shared_;
  ReplayBuffer replay_;
  RngStream master_rng_;

  mutable std::mutex dist_mu_;
  std::shared_ptr<const Distribution> dist_;

  std::mutex sink_mu_;
  EventSink sink_;

  std::mutex log_mu_;
  std::unique_ptr<std::ofstream> log_;
  std::chrono::steady_clock::time_point start_time_;

  std::vector<std::thread> threads_;
  std::atomic<bool> stop_{false};
  std::atomic<bool> pause_{false};
  std::atomic<int> paused_count_{0};
  std::atomic<int> live_workers_{0};
  std::atomic<long long> env_steps_{0};
  std::atomic<long long> episodes_{0};
  std::atomic<long long> faults_{0};
  std::atomic<long long> next_checkpoint_{0};
  std::mutex checkpoint_mu_;
};

/// Greedy or sampled rollout of one episode with fixed parameters (no
/// learning). LSTM state persists across the whole episode.
struct RolloutResult {
  double reward = 0;
  int decisions = 0;
  Outcome outcome = Outcome::Ongoing;
};
RolloutResult run_policy_episode(const AgentNet& net, const ParamStore& params,
                                 const World& world, const RenderConfig& rcfg,
                                 const EpisodeSpec& spec, RngStream& rng, bool greedy);

/// Per-word greedy evaluation table.
struct EvalRow {
  int word_id = 0;
  std::string word;
  WordClass cls = WordClass::Shape;
  int episodes = 0;
  double mean_reward = 0;
  double accuracy = 0;  // fraction of episodes ending Correct
};
std::vector<EvalRow> evaluate_words(const AgentNet& net, const ParamStore& params,
                                    const World& world, const RenderConfig& rcfg,
                                    const std::vector<int>& word_ids, int n_per_word,
                                    RngStream& rng, bool greedy = true,
                                    const EpisodeConstraints& constraints = {});

int sample_action_index(const Tensor& probs, RngStream& rng);
int greedy_action_index(const Tensor& probs);

}  // namespace gwla
