#pragma once

#include <string>
#include <vector>

#include "gwla/palette.hpp"
#include "gwla/rng.hpp"
#include "gwla/vocab.hpp"

namespace gwla {

enum class Pattern { None, Pinstriped, Dotted };

struct ObjectInstance {
  int shape_id = 0;
  Rgb base_colour;
  Pattern pattern = Pattern::None;
  float shade_factor = 1.0f;  // one of {0.55, 1.0, 1.4}
  double x = 0, y = 0;        // slot position, metres
  double rotation_phase = 0;  // radians about the vertical axis
};

struct AgentPose {
  double x = 0, y = 0;
  double heading = 0;  // radians; 0 faces +x, positive turns counterclockwise
};

struct EpisodeSpec {
  int word_id = 0;
  ObjectInstance target;
  ObjectInstance confounder;
  AgentPose start;
};

enum class Action : int {
  MoveForward = 0,
  MoveBack,
  MoveLeft,
  MoveRight,
  LookLeft,
  LookRight,
  StrafeLeft,
  StrafeRight,
};
inline constexpr int kNumActions = 8;
const char* action_name(Action a);

enum class Outcome { Ongoing, Correct, Wrong, Timeout };
const char* outcome_name(Outcome o);

struct WorldState {
  EpisodeSpec spec;
  AgentPose pose;
  int decision_step = 0;
  double target_phase = 0;
  double confounder_phase = 0;
  bool terminal = false;
};

struct StepResult {
  WorldState next;
  double reward = 0;  // {-10, 0, +10}; nonzero only on terminal bumps
  bool terminal = false;
  Outcome outcome = Outcome::Ongoing;
};

/// Attribute pools an episode may draw from; bias regimes shrink these.
struct EpisodeConstraints {
  std::vector<int> allowed_shapes;   // empty = all 40
  std::vector<int> allowed_colours;  // empty = all 10
};

struct WorldConfig {
  double room_w = 10.0, room_h = 9.0;
  double slot_x[2] = {3.0, 7.0};
  double slot_y = 1.5;
  double start_x_min = 2.0, start_x_max = 8.0;
  double start_y_min = 7.0, start_y_max = 8.5;
  double heading_jitter_deg = 20.0;
  double translate_per_microstep = 0.15;  // metres
  double rotate_per_microstep_deg = 9.0;
  int action_repeat = 4;
  double bump_radius = 0.7;
  int max_decisions = 100;
  double object_spin_per_decision_deg = 6.0;
};

/// Record of one finished episode, exportable line-per-episode.
struct EpisodeRecord {
  long long episode = 0;
  std::string word;
  Outcome outcome = Outcome::Ongoing;
  double reward = 0;
  int decisions = 0;
};
std::string episode_record_line(const EpisodeRecord& r);

/// The rectangular room with two front object slots. Episode sampling is
/// the only randomized part; reset/step are pure functions of their inputs.
class World {
 public:
  explicit World(WorldConfig cfg = {}, Vocabulary vocab = {})
      : cfg_(cfg), vocab_(std::move(vocab)) {}

  const WorldConfig& config() const { return cfg_; }
  const Vocabulary& vocab() const { return vocab_; }
  Vocabulary& vocab() { return vocab_; }

  EpisodeSpec sample_episode(int word_id, RngStream& rng,
                             const EpisodeConstraints& constraints = {}) const;
  /// Places prepared objects into uniformly-drawn slots/phases with a fresh
  /// start pose; the attribute choice is the caller's.
  EpisodeSpec assemble_episode(int word_id, ObjectInstance target, ObjectInstance confounder,
                               RngStream& rng) const;
  WorldState reset(const EpisodeSpec& spec) const;
  StepResult step(const WorldState& state, Action action) const;
  Action scripted_oracle_policy(const WorldState& state) const;
  bool is_correct(const EpisodeSpec& spec, const ObjectInstance& object) const;

 private:
  WorldConfig cfg_;
  Vocabulary vocab_;
};

/// Lateral offset of a point in the pose's frame; positive = to the left
/// as the agent looks.
double leftward_offset(const AgentPose& pose, double px, double py);

}  // namespace gwla
