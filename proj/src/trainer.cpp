#include "gwla/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <stdexcept>

#include "gwla/a3c.hpp"
#include "gwla/checkpoint.hpp"
#include "gwla/optim.hpp"

namespace gwla {

int sample_action_index(const Tensor& probs, RngStream& rng) {
  double u = rng.uniform();
  double acc = 0;
  int n = static_cast<int>(probs.numel());
  for (int i = 0; i < n; ++i) {
    acc += probs[static_cast<size_t>(i)];
    if (u < acc) return i;
  }
  return n - 1;  // rounding slack lands on the last action
}

int greedy_action_index(const Tensor& probs) {
  int best = 0;
  for (int i = 1; i < probs.numel(); ++i)
    if (probs[static_cast<size_t>(i)] > probs[static_cast<size_t>(best)]) best = i;
  return best;
}

Trainer::Trainer(TrainConfig cfg, Vocabulary vocab)
    : cfg_(std::move(cfg)),
      vocab_(std::move(vocab)),
      replay_(cfg_.replay_capacity),
      master_rng_(cfg_.seed) {
  if (cfg_.workers < 1) throw std::invalid_argument("Trainer: worker count must be >= 1");
  if (cfg_.total_env_steps < 1) throw std::invalid_argument("Trainer: step budget must be >= 1");
  agent_cfg_ = AgentConfig::make(cfg_.variant, vocab_.size(), cfg_.render.side);

  AgentNet net(agent_cfg_);
  ParamStore init;
  RngStream init_rng = master_rng_.split(0);
  net.register_params(init, init_rng, cfg_.embed_std);
  shared_ = std::make_unique<SharedParamStore>(std::move(init), cfg_.exclusive_updates);

  auto d = std::make_shared<Distribution>();
  for (int i = 0; i < Vocabulary::fixed_size() && i < vocab_.size(); ++i) d->words.push_back(i);
  dist_ = std::move(d);

  if (!cfg_.output_dir.empty()) {
    std::filesystem::create_directories(cfg_.output_dir);
    log_ = std::make_unique<std::ofstream>(artifact_path(cfg_.run_name + "_train.csv"));
    if (!*log_) throw std::runtime_error("Trainer: cannot open training log in " + cfg_.output_dir);
    (*log_) << "wall_ms,env_step,episode,word,reward,length,policy_loss,value_loss,entropy,"
               "aux_loss,outcome\n";
  }
  if (cfg_.checkpoint_every > 0) next_checkpoint_ = cfg_.checkpoint_every;
  start_time_ = std::chrono::steady_clock::now();
}

Trainer::~Trainer() {
  request_stop();
  join();
}

std::string Trainer::artifact_path(const std::string& leaf) const {
  return (std::filesystem::path(cfg_.output_dir) / leaf).string();
}

void Trainer::set_words(std::vector<int> word_ids) {
  if (word_ids.empty()) throw std::invalid_argument("set_words: empty word list");
  for (int id : word_ids) vocab_.word(id);  // range check
  std::lock_guard<std::mutex> lk(dist_mu_);
  auto d = std::make_shared<Distribution>(*dist_);
  d->words = std::move(word_ids);
  d->sampler = nullptr;
  dist_ = std::move(d);
}

void Trainer::set_constraints(EpisodeConstraints constraints) {
  std::lock_guard<std::mutex> lk(dist_mu_);
  auto d = std::make_shared<Distribution>(*dist_);
  d->constraints = std::move(constraints);
  dist_ = std::move(d);
}

void Trainer::set_episode_sampler(EpisodeSampler sampler) {
  std::lock_guard<std::mutex> lk(dist_mu_);
  auto d = std::make_shared<Distribution>(*dist_);
  d->sampler = std::move(sampler);
  dist_ = std::move(d);
}

void Trainer::set_event_sink(EventSink sink) {
  std::lock_guard<std::mutex> lk(sink_mu_);
  sink_ = std::move(sink);
}

std::shared_ptr<const Trainer::Distribution> Trainer::distribution() const {
  std::lock_guard<std::mutex> lk(dist_mu_);
  return dist_;
}

double Trainer::current_lr() const {
  return lr_schedule(cfg_.start_lr, env_steps_.load(), cfg_.total_env_steps);
}

void Trainer::start() {
  if (!threads_.empty()) throw std::logic_error("Trainer: already started");
  stop_ = false;
  for (int w = 0; w < cfg_.workers; ++w) threads_.emplace_back([this, w] { worker_loop(w); });
}

void Trainer::join() {
  for (auto& t : threads_)
    if (t.joinable()) t.join();
  threads_.clear();
}

void Trainer::request_stop() { stop_ = true; }

void Trainer::request_pause() {
  pause_ = true;
  while (paused_count_.load() < live_workers_.load())
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
}

void Trainer::resume() { pause_ = false; }

void Trainer::honor_pause() {
  if (!pause_.load()) return;
  ++paused_count_;
  while (pause_.load() && !stop_.load())
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  --paused_count_;
}

void Trainer::worker_loop(int wid) {
  ++live_workers_;
  RngStream rng = master_rng_.split(1000 + static_cast<uint64_t>(wid));
  World world(cfg_.world, vocab_);
  AgentNet net(agent_cfg_);
  ParamStore local = shared_->layout();

  while (!stop_.load() && env_steps_.load() < cfg_.total_env_steps) {
    honor_pause();
    if (stop_.load()) break;
    auto dist = distribution();
    try {
      EpisodeSpec spec;
      if (dist->sampler) {
        spec = dist->sampler(world, rng);
      } else {
        int wi = dist->words[static_cast<size_t>(
            rng.uniform_int(static_cast<int>(dist->words.size())))];
        spec = world.sample_episode(wi, rng, dist->constraints);
      }
      run_training_episode(wid, world, net, local, rng, spec);
    } catch (const std::exception&) {
      ++faults_;  // recorded; continue with a fresh episode
    }
  }
  --live_workers_;
}

bool Trainer::run_training_episode(int wid, World& world, const AgentNet& net, ParamStore& local,
                                   RngStream& rng, const EpisodeSpec& spec) {
  WorldState st = world.reset(spec);
  LstmState lstm = LstmState::zeros(agent_cfg_.lstm_width);
  std::vector<Tensor> last_frames;
  double ep_reward = 0;
  int decisions = 0;
  Outcome outcome = Outcome::Ongoing;
  double sum_policy = 0, sum_value = 0, sum_entropy = 0, sum_aux = 0;
  int unrolls = 0, aux_steps = 0;

  std::vector<StepCacheT<float>> caches;
  std::vector<Tensor> probs;
  std::vector<int> actions;
  std::vector<float> rewards, values;

  while (!st.terminal) {
    if (stop_.load() || env_steps_.load() >= cfg_.total_env_steps) return false;
    shared_->snapshot_to(local);
    local.zero_grads();
    caches.clear();
    probs.clear();
    actions.clear();
    rewards.clear();
    values.clear();

    for (int t = 0; t < cfg_.unroll && !st.terminal; ++t) {
      Tensor frame = render(st, cfg_.world, cfg_.render);
      caches.emplace_back();
      ForwardResultT<float> fwd = net.forward(local, frame, spec.word_id, lstm, &caches.back());
      int a = sample_action_index(fwd.probs, rng);
      StepResult sr = world.step(st, static_cast<Action>(a));
      probs.push_back(fwd.probs);
      actions.push_back(a);
      values.push_back(fwd.value);
      rewards.push_back(static_cast<float>(sr.reward));
      lstm = std::move(fwd.state);
      st = sr.next;
      outcome = sr.outcome;
      ep_reward += sr.reward;
      ++decisions;
      env_steps_ += cfg_.world.action_repeat;
      if (last_frames.size() >= static_cast<size_t>(ReplayEntry::kObservations))
        last_frames.erase(last_frames.begin());
      last_frames.push_back(std::move(frame));
    }

    float bootstrap = 0;
    if (!st.terminal) {
      Tensor bf = render(st, cfg_.world, cfg_.render);
      bootstrap = net.forward(local, bf, spec.word_id, lstm).value;
    }
    std::vector<float> returns = compute_returns(rewards, bootstrap, static_cast<float>(cfg_.gamma));
    std::vector<Tensor> dlogits;
    std::vector<float> dvalues;
    A3cLoss loss = a3c_grads(probs, actions, values, returns, cfg_.entropy_cost, &dlogits, &dvalues);

    Tensor dh({agent_cfg_.lstm_width}), dc({agent_cfg_.lstm_width});
    for (size_t t = caches.size(); t-- > 0;)
      net.backward_step(local, caches[t], dlogits[t], dvalues[t], dh, dc);

    if (cfg_.aux_enabled && replay_.size() >= static_cast<size_t>(cfg_.aux_batch)) {
      double aux_total = 0;
      for (int b = 0; b < cfg_.aux_batch; ++b) {
        ReplayEntry e;
        replay_.sample(rng, e);
        AuxCacheT<float> ac;
        std::vector<int> words(ReplayEntry::kObservations, e.word_id);
        aux_total += net.aux_forward(local, e.decode(), words, static_cast<int>(e.label), &ac);
        net.aux_backward(local, ac, static_cast<float>(cfg_.aux_weight / cfg_.aux_batch));
      }
      sum_aux += aux_total / cfg_.aux_batch;
      ++aux_steps;
    }

    scale_grads(local, static_cast<float>(cfg_.cost_base));
    clip_global_norm(local, static_cast<float>(cfg_.clip_norm));
    shared_->apply_rmsprop(local, static_cast<float>(current_lr()),
                           static_cast<float>(cfg_.rmsprop_decay),
                           static_cast<float>(cfg_.rmsprop_eps));
    sum_policy += loss.policy;
    sum_value += loss.value;
    sum_entropy += loss.entropy;
    ++unrolls;
  }

  replay_.push(ReplayEntry::from_frames(last_frames, spec.word_id, ep_reward));
  TrainEvent ev;
  ev.episode = ++episodes_;
  ev.env_step = env_steps_.load();
  ev.worker = wid;
  ev.word_id = spec.word_id;
  ev.word = vocab_.word(spec.word_id);
  ev.outcome = outcome;
  ev.reward = ep_reward;
  ev.decisions = decisions;
  ev.policy_loss = unrolls ? sum_policy / unrolls : 0;
  ev.value_loss = unrolls ? sum_value / unrolls : 0;
  ev.entropy = unrolls ? sum_entropy / unrolls : 0;
  ev.aux_loss = aux_steps ? sum_aux / aux_steps : 0;
  emit(std::move(ev));
  maybe_checkpoint(wid);
  return true;
}

void Trainer::emit(TrainEvent ev) {
  if (log_) {
    long long wall_ms =
        cfg_.exclusive_updates
            ? 0  // keeps logs byte-identical across reruns
            : std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - start_time_)
                  .count();
    char line[512];
    std::snprintf(line, sizeof(line), "%lld,%lld,%lld,%s,%.3f,%d,%.6g,%.6g,%.6g,%.6g,%s\n",
                  wall_ms, ev.env_step, ev.episode, ev.word.c_str(), ev.reward, ev.decisions,
                  ev.policy_loss, ev.value_loss, ev.entropy, ev.aux_loss,
                  outcome_name(ev.outcome));
    std::lock_guard<std::mutex> lk(log_mu_);
    (*log_) << line;
    log_->flush();
  }
  std::lock_guard<std::mutex> lk(sink_mu_);
  if (sink_) sink_(ev);
}

void Trainer::maybe_checkpoint(int wid) {
  if (wid != 0 || cfg_.checkpoint_every <= 0 || cfg_.output_dir.empty()) return;
  long long due = next_checkpoint_.load();
  if (env_steps_.load() < due) return;
  std::lock_guard<std::mutex> lk(checkpoint_mu_);
  if (env_steps_.load() < next_checkpoint_.load()) return;
  long long step = env_steps_.load();
  next_checkpoint_ = step + cfg_.checkpoint_every;
  ParamStore snap = shared_->copy();
  std::map<std::string, float> meta = {{"env_step", static_cast<float>(step)},
                                       {"episode", static_cast<float>(episodes_.load())}};
  save_checkpoint(artifact_path(cfg_.run_name + "_step" + std::to_string(step) + ".gwla"), snap,
                  meta);
}

RolloutResult run_policy_episode(const AgentNet& net, const ParamStore& params,
                                 const World& world, const RenderConfig& rcfg,
                                 const EpisodeSpec& spec, RngStream& rng, bool greedy) {
  WorldState st = world.reset(spec);
  LstmState lstm = LstmState::zeros(net.config().lstm_width);
  RolloutResult out;
  while (!st.terminal) {
    Tensor frame = render(st, world.config(), rcfg);
    ForwardResultT<float> fwd = net.forward(params, frame, spec.word_id, lstm);
    int a = greedy ? greedy_action_index(fwd.probs) : sample_action_index(fwd.probs, rng);
    StepResult sr = world.step(st, static_cast<Action>(a));
    lstm = std::move(fwd.state);
    st = sr.next;
    out.reward += sr.reward;
    out.outcome = sr.outcome;
    ++out.decisions;
  }
  return out;
}

std::vector<EvalRow> evaluate_words(const AgentNet& net, const ParamStore& params,
                                    const World& world, const RenderConfig& rcfg,
                                    const std::vector<int>& word_ids, int n_per_word,
                                    RngStream& rng, bool greedy,
                                    const EpisodeConstraints& constraints) {
  std::vector<EvalRow> rows;
  for (int wid : word_ids) {
    EvalRow row;
    row.word_id = wid;
    row.word = world.vocab().word(wid);
    row.cls = world.vocab().cls(wid);
    int correct = 0;
    for (int e = 0; e < n_per_word; ++e) {
      EpisodeSpec spec = world.sample_episode(wid, rng, constraints);
      RolloutResult r = run_policy_episode(net, params, world, rcfg, spec, rng, greedy);
      row.mean_reward += r.reward;
      if (r.outcome == Outcome::Correct) ++correct;
      ++row.episodes;
    }
    if (row.episodes) {
      row.mean_reward /= row.episodes;
      row.accuracy = static_cast<double>(correct) / row.episodes;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace gwla
