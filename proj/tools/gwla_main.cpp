#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gwla/checkpoint.hpp"
#include "gwla/config.hpp"
#include "gwla/csv.hpp"
#include "gwla/diagnostics.hpp"
#include "gwla/experiments.hpp"
#include "gwla/svg.hpp"
#include "gwla/trainer.hpp"

namespace gwla {
namespace {

struct CommonOpts {
  std::vector<std::string> config_files;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_files, "key = value config file (repeatable)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", opts.overrides, "key=value override (repeatable, highest precedence)");
}

/// defaults < config files < GWL_* environment < --set
Config resolve_config(const CommonOpts& opts) {
  Config cfg;
  for (const auto& f : opts.config_files) cfg.load_file(f);
  cfg.load_env();
  for (const auto& s : opts.overrides) cfg.set_pair(s);
  return cfg;
}

std::string out_path(const Config& cfg, const std::string& leaf) {
  std::filesystem::create_directories(cfg.get("output_dir"));
  return (std::filesystem::path(cfg.get("output_dir")) / leaf).string();
}

void write_manifest(const Config& cfg, const std::string& command,
                    const std::vector<std::string>& artifacts) {
  std::string text = "command = " + command + "\n" + cfg.manifest();
  for (const auto& a : artifacts) text += "artifact = " + a + "\n";
  write_text_file(out_path(cfg, cfg.get("run_name") + "_" + command + "_manifest.txt"), text);
}

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Loads a checkpoint into a store laid out for the given variant; the
/// variant and vocabulary size must match what the file was saved with.
ParamStore load_agent_checkpoint(const std::string& path, const AgentConfig& acfg,
                                 std::map<std::string, float>* meta_out = nullptr) {
  AgentNet net(acfg);
  ParamStore params;
  RngStream rng(0);
  net.register_params(params, rng, 0.75);
  auto meta = load_checkpoint(path, params);
  if (meta_out) *meta_out = meta;
  return params;
}

int cmd_train(const CommonOpts& opts) {
  Config cfg = resolve_config(opts);
  TrainConfig tc = train_config_from(cfg);
  Vocabulary vocab;
  std::vector<int> words = words_from(cfg, vocab);

  Trainer trainer(tc, vocab);
  trainer.set_words(words);

  VocabTracker tracker;
  std::mutex mu;
  trainer.set_event_sink([&](const TrainEvent& ev) {
    std::lock_guard<std::mutex> lk(mu);
    tracker.observe(ev.env_step, ev.word_id, ev.outcome == Outcome::Correct);
  });

  std::printf("training %s: %d workers, %lld env steps, %zu words\n",
              variant_name(tc.variant), tc.workers, tc.total_env_steps, words.size());
  trainer.run();

  CsvTable curve;
  curve.header = {"env_step", "known_words"};
  for (const auto& [step, known] : tracker.curve())
    curve.rows.push_back({std::to_string(step), std::to_string(known)});
  std::string curve_path = out_path(cfg, tc.run_name + "_vocab_curve.csv");
  write_csv(curve_path, curve);

  std::string ckpt_path = out_path(cfg, tc.run_name + "_final.gwla");
  save_checkpoint(ckpt_path, trainer.params_copy(),
                  {{"env_step", static_cast<float>(trainer.env_steps())},
                   {"episode", static_cast<float>(trainer.episodes())}});

  write_manifest(cfg, "train",
                 {curve_path, ckpt_path, out_path(cfg, tc.run_name + "_train.csv")});
  std::printf("done: %lld episodes, %lld env steps, %d known words, %lld faults\n",
              trainer.episodes(), trainer.env_steps(), tracker.known_count(), trainer.faults());
  return trainer.faults() == 0 ? 0 : 1;
}

int cmd_eval(const CommonOpts& opts, const std::string& checkpoint, const std::string& policy) {
  Config cfg = resolve_config(opts);
  Vocabulary vocab;
  std::vector<int> words = words_from(cfg, vocab);
  World world(WorldConfig{}, vocab);
  RenderConfig rcfg;
  rcfg.side = static_cast<int>(cfg.get_int("frame_side"));
  int episodes = static_cast<int>(cfg.get_int("eval_episodes"));
  RngStream rng(static_cast<uint64_t>(cfg.get_int("seed")) + 77);

  CsvTable table;
  table.header = {"word", "class", "episodes", "mean_reward", "accuracy"};

  if (policy.empty()) {
    if (checkpoint.empty())
      throw std::invalid_argument("eval: need --checkpoint or --policy oracle|random");
    AgentConfig acfg =
        AgentConfig::make(variant_from(cfg.get("variant")), vocab.size(), rcfg.side);
    ParamStore params = load_agent_checkpoint(checkpoint, acfg);
    AgentNet net(acfg);
    auto rows = evaluate_words(net, params, world, rcfg, words, episodes, rng);
    for (const auto& r : rows)
      table.rows.push_back({r.word, word_class_name(r.cls), std::to_string(r.episodes),
                            fmt_double(r.mean_reward), fmt_double(r.accuracy)});
  } else if (policy == "oracle" || policy == "random") {
    for (int wid : words) {
      double total = 0;
      int correct = 0;
      for (int e = 0; e < episodes; ++e) {
        EpisodeSpec spec = world.sample_episode(wid, rng);
        WorldState st = world.reset(spec);
        double ep_reward = 0;
        Outcome outcome = Outcome::Ongoing;
        while (!st.terminal) {
          Action a = policy == "oracle" ? world.scripted_oracle_policy(st)
                                        : static_cast<Action>(rng.uniform_int(kNumActions));
          StepResult sr = world.step(st, a);
          ep_reward += sr.reward;
          st = sr.next;
          if (sr.terminal) outcome = sr.outcome;
        }
        total += ep_reward;
        if (outcome == Outcome::Correct) ++correct;
      }
      table.rows.push_back({vocab.word(wid), word_class_name(vocab.cls(wid)),
                            std::to_string(episodes), fmt_double(total / episodes),
                            fmt_double(static_cast<double>(correct) / episodes)});
    }
  } else {
    throw std::invalid_argument("eval: unknown policy '" + policy +
                                "' (expected oracle or random)");
  }

  std::string path = out_path(cfg, cfg.get("run_name") + "_eval.csv");
  write_csv(path, table);
  write_manifest(cfg, "eval", {path});
  double grand = 0;
  for (size_t r = 0; r < table.rows.size(); ++r) grand += table.number(r, 3);
  std::printf("eval: %zu words, mean reward %.3f -> %s\n", table.rows.size(),
              table.rows.empty() ? 0.0 : grand / table.rows.size(), path.c_str());
  return 0;
}

int cmd_bias(const CommonOpts& opts) {
  Config cfg = resolve_config(opts);
  BiasRunConfig bc;
  bc.train = train_config_from(cfg);
  bc.shape_words = static_cast<int>(cfg.get_int("bias_shape_words"));
  bc.colour_words = static_cast<int>(cfg.get_int("bias_colour_words"));
  bc.ambiguous_words = static_cast<int>(cfg.get_int("bias_ambiguous"));
  bc.probe_every = cfg.get_int("probe_every");
  bc.probe_episodes = static_cast<int>(cfg.get_int("probe_episodes"));

  std::printf("bias regime (%d,%d): %lld env steps, probes every %lld\n", bc.shape_words,
              bc.colour_words, bc.train.total_env_steps, bc.probe_every);
  BiasRunResult res = run_bias_regime(bc);

  CsvTable table;
  table.header = {"env_step", "mean_score", "episodes"};
  for (const auto& p : res.probes)
    table.rows.push_back(
        {std::to_string(p.env_step), fmt_double(p.mean_score), std::to_string(p.episodes)});
  std::string path = out_path(cfg, cfg.get("run_name") + "_bias_probes.csv");
  write_csv(path, table);
  write_manifest(cfg, "bias", {path});

  std::printf("probes: %zu, final score %.3f, params untouched by probes: %s\n",
              res.probes.size(), res.probes.empty() ? 0.0 : res.probes.back().mean_score,
              res.params_hash_ok ? "yes" : "NO");
  return res.params_hash_ok ? 0 : 1;
}

int cmd_curriculum(const CommonOpts& opts) {
  Config cfg = resolve_config(opts);
  TrainConfig tc = train_config_from(cfg);
  Vocabulary vocab;
  RngStream rng(static_cast<uint64_t>(cfg.get_int("seed")) + 31);
  CurriculumSchedule schedule =
      CurriculumSchedule::make(vocab, rng, cfg.get_int_list("curriculum_sizes"));

  Trainer trainer(tc, vocab);
  std::printf("curriculum %s over %zu stages, budget %lld env steps\n",
              cfg.get("curriculum_sizes").c_str(), schedule.stages.size(), tc.total_env_steps);
  CurriculumResult res = run_curriculum(trainer, schedule);

  CsvTable table;
  table.header = {"from_stage", "to_stage", "env_step", "stage_trials"};
  for (const auto& t : res.transitions)
    table.rows.push_back({std::to_string(t.from_stage), std::to_string(t.to_stage),
                          std::to_string(t.env_step), std::to_string(t.stage_trials)});
  std::string path = out_path(cfg, tc.run_name + "_curriculum.csv");
  write_csv(path, table);
  write_manifest(cfg, "curriculum", {path});

  std::printf("transitions: %zu, completed: %s, final step %lld\n", res.transitions.size(),
              res.completed ? "yes" : "no", res.final_env_step);
  return 0;
}

int cmd_compare(const CommonOpts& opts, const std::string& pretrained_path,
                const std::string& base_words_arg) {
  Config cfg = resolve_config(opts);
  TrainConfig tc = train_config_from(cfg);
  Vocabulary vocab;
  std::vector<int> extended = words_from(cfg, vocab);

  std::vector<int> base;
  {
    Config tmp;
    tmp.set("words", base_words_arg);
    base = words_from(tmp, vocab);
  }
  int target_new = static_cast<int>(cfg.get_int("target_new_known"));

  AgentConfig acfg = AgentConfig::make(tc.variant, vocab.size(), tc.render.side);
  ParamStore pretrained = load_agent_checkpoint(pretrained_path, acfg);

  std::printf("compare: %zu base words -> %zu extended, target %d new known\n", base.size(),
              extended.size(), target_new);
  CompareResult res = run_pretraining_comparison(tc, vocab, base, extended, target_new,
                                                 pretrained);

  CsvTable table;
  table.header = {"condition", "env_step", "known"};
  for (const auto& [step, known] : res.pretrained.curve)
    table.rows.push_back({"pretrained", std::to_string(step), std::to_string(known)});
  for (const auto& [step, known] : res.fresh.curve)
    table.rows.push_back({"fresh", std::to_string(step), std::to_string(known)});
  std::string path = out_path(cfg, tc.run_name + "_compare.csv");
  write_csv(path, table);
  write_manifest(cfg, "compare", {path});

  std::printf("steps to %d new words: pretrained %lld, fresh %lld\n", target_new,
              res.pretrained.steps_to_target, res.fresh.steps_to_target);
  return 0;
}

Tensor grey_to_rgb(const Tensor& map) {
  int side = map.shape[0];
  Tensor out({3, side, side});
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < side * side; ++i) out.data[c * side * side + i] = map.data[i];
  return out;
}

int cmd_probe(const CommonOpts& opts, const std::string& checkpoint, const std::string& word) {
  Config cfg = resolve_config(opts);
  Vocabulary vocab;
  int wid = vocab.id(word);
  RenderConfig rcfg;
  rcfg.side = static_cast<int>(cfg.get_int("frame_side"));
  AgentConfig acfg = AgentConfig::make(variant_from(cfg.get("variant")), vocab.size(), rcfg.side);
  ParamStore params = load_agent_checkpoint(checkpoint, acfg);
  AgentNet net(acfg);

  World world(WorldConfig{}, vocab);
  RngStream rng(static_cast<uint64_t>(cfg.get_int("seed")) + 913);
  EpisodeSpec spec = world.sample_episode(wid, rng);
  WorldState st = world.reset(spec);
  Tensor frame = render(st, world.config(), rcfg);

  std::vector<std::string> artifacts;
  std::string frame_path = out_path(cfg, cfg.get("run_name") + "_probe_frame.ppm");
  write_ppm(frame_path, frame);
  artifacts.push_back(frame_path);

  StepCache cache;
  auto fr = net.forward(params, frame, wid, LstmState::zeros(acfg.lstm_width), &cache);
  CsvTable diag;
  diag.header = {"quantity", "value"};
  diag.rows.push_back({"value_estimate", fmt_double(fr.value)});
  diag.rows.push_back({"pathway_ratio", fmt_double(fr.diag.pathway_ratio)});
  if (acfg.variant == Variant::LayerwiseAttention) {
    for (int l = 0; l < 3; ++l)
      diag.rows.push_back({"layer" + std::to_string(l + 1) + "_mass",
                           fmt_double(fr.diag.layer_masses[l])});
    Tensor sal = net.saliency(params, frame, wid);
    std::string sal_path = out_path(cfg, cfg.get("run_name") + "_probe_saliency.ppm");
    write_ppm(sal_path, grey_to_rgb(sal));
    artifacts.push_back(sal_path);
  }
  std::string diag_path = out_path(cfg, cfg.get("run_name") + "_probe_diag.csv");
  write_csv(diag_path, diag);
  artifacts.push_back(diag_path);

  EmbeddingExport emb = export_embeddings(params, vocab);
  CsvTable etab;
  etab.header = {"word", "class", "pc1", "pc2"};
  for (size_t i = 0; i < emb.words.size(); ++i)
    etab.rows.push_back({emb.words[i], word_class_name(emb.classes[i]),
                         fmt_double(emb.pca[i * 2]), fmt_double(emb.pca[i * 2 + 1])});
  std::string emb_path = out_path(cfg, cfg.get("run_name") + "_embeddings.csv");
  write_csv(emb_path, etab);
  artifacts.push_back(emb_path);

  write_manifest(cfg, "probe", artifacts);
  std::printf("probe '%s': value %.3f, embedding purity %.3f\n", word.c_str(),
              static_cast<double>(fr.value),
              nearest_centroid_purity(emb.vectors, emb.classes));
  return 0;
}

int cmd_render_preview(const CommonOpts& opts, const std::string& word, int steps) {
  Config cfg = resolve_config(opts);
  Vocabulary vocab;
  int wid = word.empty() ? 0 : vocab.id(word);
  World world(WorldConfig{}, vocab);
  RenderConfig rcfg;
  rcfg.side = static_cast<int>(cfg.get_int("frame_side"));
  RngStream rng(static_cast<uint64_t>(cfg.get_int("seed")));
  EpisodeSpec spec = world.sample_episode(wid, rng);
  WorldState st = world.reset(spec);

  std::vector<std::string> artifacts;
  auto dump = [&](int idx) {
    char leaf[64];
    std::snprintf(leaf, sizeof leaf, "%s_preview_%03d.ppm", cfg.get("run_name").c_str(), idx);
    std::string path = out_path(cfg, leaf);
    write_ppm(path, render(st, world.config(), rcfg));
    artifacts.push_back(path);
  };
  dump(0);
  for (int i = 1; i <= steps && !st.terminal; ++i) {
    st = world.step(st, world.scripted_oracle_policy(st)).next;
    dump(i);
  }
  write_manifest(cfg, "render-preview", artifacts);
  std::printf("wrote %zu frame(s) for '%s'\n", artifacts.size(), vocab.word(wid).c_str());
  return 0;
}

int cmd_plot(const CommonOpts& opts, const std::string& csv_path, const std::string& kind,
             const std::string& title, std::string svg_path) {
  Config cfg = resolve_config(opts);
  CsvTable table = read_csv(csv_path);
  std::string svg;
  if (kind == "line")
    svg = svg_line_chart(table, title);
  else if (kind == "bar")
    svg = svg_bar_chart(table, title);
  else
    throw std::invalid_argument("plot: unknown kind '" + kind + "' (expected line or bar)");
  if (svg_path.empty())
    svg_path = out_path(cfg, std::filesystem::path(csv_path).stem().string() + ".svg");
  write_text_file(svg_path, svg);
  write_manifest(cfg, "plot", {svg_path});
  std::printf("wrote %s\n", svg_path.c_str());
  return 0;
}

int cmd_gradcheck(const CommonOpts& opts, double tolerance) {
  Config cfg = resolve_config(opts);
  uint64_t seed = static_cast<uint64_t>(cfg.get_int("seed"));
  bool all_ok = true;
  for (Variant v : {Variant::Baseline, Variant::LayerwiseAttention}) {
    GradCheckResult res = agent_gradient_check(v, seed);
    bool ok = res.passes(tolerance);
    all_ok = all_ok && ok;
    std::printf("%-20s checked %zu coords, max rel err %.3e (%s[%zu]: analytic %.6e vs "
                "numeric %.6e) %s\n",
                variant_name(v), res.checked, res.max_rel_error, res.worst_param.c_str(),
                res.worst_index, res.analytic, res.numeric, ok ? "OK" : "FAIL");
  }
  return all_ok ? 0 : 1;
}

}  // namespace
}  // namespace gwla

int main(int argc, char** argv) {
  using namespace gwla;
  CLI::App app{"grounded word learning: training, evaluation and analysis"};
  app.require_subcommand(1);

  CommonOpts train_o, eval_o, bias_o, cur_o, cmp_o, probe_o, prev_o, plot_o, gc_o;

  auto* train = app.add_subcommand("train", "train an agent and drop curve + checkpoint");
  add_common(train, train_o);

  auto* eval = app.add_subcommand("eval", "per-word greedy evaluation table");
  add_common(eval, eval_o);
  std::string eval_ckpt, eval_policy;
  eval->add_option("--checkpoint", eval_ckpt, "agent checkpoint to evaluate");
  eval->add_option("--policy", eval_policy, "scripted baseline: oracle or random");

  auto* bias = app.add_subcommand("bias", "train under a bias regime with periodic probes");
  add_common(bias, bias_o);

  auto* curriculum = app.add_subcommand("curriculum", "staged vocabulary with mastery gates");
  add_common(curriculum, cur_o);

  auto* compare = app.add_subcommand("compare", "pretrained vs fresh learning speed");
  add_common(compare, cmp_o);
  std::string cmp_ckpt, cmp_base;
  compare->add_option("--pretrained", cmp_ckpt, "checkpoint trained on the base words")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("--base-words", cmp_base, "comma-separated base words")->required();

  auto* probe = app.add_subcommand("probe", "saliency, attention and embedding analysis");
  add_common(probe, probe_o);
  std::string probe_ckpt, probe_word;
  probe->add_option("--checkpoint", probe_ckpt, "agent checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  probe->add_option("--word", probe_word, "instruction word")->required();

  auto* preview = app.add_subcommand("render-preview", "dump first-person frames of an episode");
  add_common(preview, prev_o);
  std::string prev_word;
  int prev_steps = 0;
  preview->add_option("--word", prev_word, "instruction word (default: first shape)");
  preview->add_option("--steps", prev_steps, "oracle decisions to roll forward");

  auto* plot = app.add_subcommand("plot", "render a csv as a deterministic svg chart");
  add_common(plot, plot_o);
  std::string plot_csv, plot_kind = "line", plot_title, plot_svg;
  plot->add_option("--csv", plot_csv, "input table")->required()->check(CLI::ExistingFile);
  plot->add_option("--kind", plot_kind, "line or bar");
  plot->add_option("--title", plot_title, "chart title");
  plot->add_option("--svg", plot_svg, "output path (default: next to output_dir)");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient audit");
  add_common(gradcheck, gc_o);
  double gc_tol = 1e-4;
  gradcheck->add_option("--tolerance", gc_tol, "max relative error allowed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(train_o);
    if (eval->parsed()) return cmd_eval(eval_o, eval_ckpt, eval_policy);
    if (bias->parsed()) return cmd_bias(bias_o);
    if (curriculum->parsed()) return cmd_curriculum(cur_o);
    if (compare->parsed()) return cmd_compare(cmp_o, cmp_ckpt, cmp_base);
    if (probe->parsed()) return cmd_probe(probe_o, probe_ckpt, probe_word);
    if (preview->parsed()) return cmd_render_preview(prev_o, prev_word, prev_steps);
    if (plot->parsed()) return cmd_plot(plot_o, plot_csv, plot_kind, plot_title, plot_svg);
    if (gradcheck->parsed()) return cmd_gradcheck(gc_o, gc_tol);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
