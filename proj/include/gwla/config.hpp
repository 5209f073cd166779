#pragma once

#include <cctype>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwla/trainer.hpp"

namespace gwla {

/// Flat key=value configuration with a fixed key registry. Precedence:
/// defaults < config file < GWL_* environment variables < --set overrides
/// (callers apply them in that order).
class Config {
 public:
  Config() {
    reg("variant", "layerwise_attention");
    reg("workers", "16");
    reg("seed", "1");
    reg("total_env_steps", "1000000");
    reg("unroll", "50");
    reg("gamma", "0.99");
    reg("cost_base", "0.5");
    reg("clip_norm", "100");
    reg("rmsprop_decay", "0.99");
    reg("rmsprop_eps", "0.1");
    reg("start_lr", "0.001");
    reg("entropy_cost", "0.003");
    reg("embed_std", "0.75");
    reg("aux_enabled", "true");
    reg("aux_weight", "1.0");
    reg("aux_batch", "32");
    reg("replay_capacity", "2048");
    reg("exclusive_updates", "false");
    reg("checkpoint_every", "0");
    reg("output_dir", "out");
    reg("run_name", "run");
    reg("frame_side", "84");
    reg("words", "");  // comma-separated; empty = whole fixed vocabulary
    reg("eval_episodes", "200");
    reg("probe_every", "50000");
    reg("probe_episodes", "1000");
    reg("bias_shape_words", "8");
    reg("bias_colour_words", "8");
    reg("bias_ambiguous", "1");
    reg("curriculum_sizes", "2,5,10,40");
    reg("target_new_known", "2");
    reg("max_decisions", "100");
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  void set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::invalid_argument("unknown config key: " + key);
    it->second = value;
  }

  /// `key = value` lines; '#' starts a comment; blank lines ignored.
  void load_file(const std::string& path);

  /// GWL_<KEY> (upper-case) environment overrides for every registered key.
  void load_env() {
    for (auto& [key, value] : values_) {
      std::string env_name = "GWL_";
      for (char c : key) env_name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (const char* v = std::getenv(env_name.c_str())) value = v;
    }
  }

  /// "key=value" as passed to --set.
  void set_pair(const std::string& pair) {
    auto eq = pair.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got: " + pair);
    set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
  }

  const std::string& get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::invalid_argument("unknown config key: " + key);
    return it->second;
  }

  long long get_int(const std::string& key) const {
    try {
      size_t pos = 0;
      long long v = std::stoll(get(key), &pos);
      if (pos != get(key).size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("config key " + key + ": not an integer: '" + get(key) + "'");
    }
  }

  double get_double(const std::string& key) const {
    try {
      size_t pos = 0;
      double v = std::stod(get(key), &pos);
      if (pos != get(key).size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("config key " + key + ": not a number: '" + get(key) + "'");
    }
  }

  bool get_bool(const std::string& key) const {
    const std::string& v = get(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config key " + key + ": not a boolean: '" + v + "'");
  }

  std::vector<int> get_int_list(const std::string& key) const;

  /// Resolved `key = value` lines, sorted by key.
  std::string manifest() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

  static std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

 private:
  void reg(const std::string& key, const std::string& def) { values_[key] = def; }
  std::map<std::string, std::string> values_;
};

TrainConfig train_config_from(const Config& cfg);
Variant variant_from(const std::string& name);

/// Word-id list from the config's comma-separated `words` (names or ids);
/// empty input yields the whole fixed vocabulary.
std::vector<int> words_from(const Config& cfg, const Vocabulary& vocab);

}  // namespace gwla
