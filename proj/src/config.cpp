#include "gwla/config.hpp"

#include <cctype>
#include <fstream>

namespace gwla {

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::vector<int> Config::get_int_list(const std::string& key) const {
  std::vector<int> out;
  const std::string& raw = get(key);
  size_t pos = 0;
  while (pos <= raw.size()) {
    size_t comma = raw.find(',', pos);
    std::string tok = trim(raw.substr(pos, comma == std::string::npos ? std::string::npos
                                                                      : comma - pos));
    if (!tok.empty()) {
      try {
        size_t used = 0;
        out.push_back(std::stoi(tok, &used));
        if (used != tok.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw std::invalid_argument("config key " + key + ": not an integer list entry: '" + tok +
                                    "'");
      }
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

Variant variant_from(const std::string& name) {
  if (name == "baseline") return Variant::Baseline;
  if (name == "layerwise_attention" || name == "attention") return Variant::LayerwiseAttention;
  throw std::invalid_argument("unknown variant: '" + name +
                              "' (expected baseline or layerwise_attention)");
}

TrainConfig train_config_from(const Config& cfg) {
  TrainConfig t;
  t.variant = variant_from(cfg.get("variant"));
  t.workers = static_cast<int>(cfg.get_int("workers"));
  t.seed = static_cast<uint64_t>(cfg.get_int("seed"));
  t.total_env_steps = cfg.get_int("total_env_steps");
  t.unroll = static_cast<int>(cfg.get_int("unroll"));
  t.gamma = cfg.get_double("gamma");
  t.cost_base = cfg.get_double("cost_base");
  t.clip_norm = cfg.get_double("clip_norm");
  t.rmsprop_decay = cfg.get_double("rmsprop_decay");
  t.rmsprop_eps = cfg.get_double("rmsprop_eps");
  t.start_lr = cfg.get_double("start_lr");
  t.entropy_cost = cfg.get_double("entropy_cost");
  t.embed_std = cfg.get_double("embed_std");
  t.aux_enabled = cfg.get_bool("aux_enabled");
  t.aux_weight = cfg.get_double("aux_weight");
  t.aux_batch = static_cast<int>(cfg.get_int("aux_batch"));
  t.replay_capacity = static_cast<size_t>(cfg.get_int("replay_capacity"));
  t.exclusive_updates = cfg.get_bool("exclusive_updates");
  t.checkpoint_every = cfg.get_int("checkpoint_every");
  t.output_dir = cfg.get("output_dir");
  t.run_name = cfg.get("run_name");
  t.render.side = static_cast<int>(cfg.get_int("frame_side"));
  t.world.max_decisions = static_cast<int>(cfg.get_int("max_decisions"));
  if (t.unroll < 1) throw std::invalid_argument("config key unroll: must be >= 1");
  if (t.gamma <= 0 || t.gamma > 1)
    throw std::invalid_argument("config key gamma: must be in (0, 1]");
  if (t.start_lr <= 0) throw std::invalid_argument("config key start_lr: must be positive");
  if (t.entropy_cost < 0)
    throw std::invalid_argument("config key entropy_cost: must be nonnegative");
  return t;
}

std::vector<int> words_from(const Config& cfg, const Vocabulary& vocab) {
  const std::string& raw = cfg.get("words");
  std::vector<int> out;
  if (Config::trim(raw).empty()) {
    for (int i = 0; i < Vocabulary::fixed_size() && i < vocab.size(); ++i) out.push_back(i);
    return out;
  }
  size_t pos = 0;
  while (pos <= raw.size()) {
    size_t comma = raw.find(',', pos);
    std::string tok = Config::trim(
        raw.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (!tok.empty()) {
      bool digits = !tok.empty();
      for (char c : tok)
        if (!std::isdigit(static_cast<unsigned char>(c))) digits = false;
      if (digits) {
        int id = std::stoi(tok);
        vocab.word(id);  // range check
        out.push_back(id);
      } else {
        out.push_back(vocab.id(tok));
      }
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("config key words: empty word list");
  return out;
}

}  // namespace gwla
