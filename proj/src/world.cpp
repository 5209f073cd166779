#include "gwla/world.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace gwla {

namespace {

constexpr double kPi = std::numbers::pi;

double deg(double d) { return d * kPi / 180.0; }

double wrap_angle(double a) {
  while (a > kPi) a -= 2 * kPi;
  while (a <= -kPi) a += 2 * kPi;
  return a;
}

int draw_from(const std::vector<int>& pool, RngStream& rng) {
  return pool[rng.uniform_int(static_cast<uint64_t>(pool.size()))];
}

std::vector<int> without(const std::vector<int>& pool, int excluded) {
  std::vector<int> out;
  out.reserve(pool.size());
  for (int v : pool)
    if (v != excluded) out.push_back(v);
  return out;
}

std::vector<int> full_range(int n) {
  std::vector<int> out(n);
  for (int i = 0; i < n; ++i) out[i] = i;
  return out;
}

}  // namespace

const char* action_name(Action a) {
  switch (a) {
    case Action::MoveForward: return "move-forward";
    case Action::MoveBack: return "move-back";
    case Action::MoveLeft: return "move-left";
    case Action::MoveRight: return "move-right";
    case Action::LookLeft: return "look-left";
    case Action::LookRight: return "look-right";
    case Action::StrafeLeft: return "strafe-left";
    case Action::StrafeRight: return "strafe-right";
  }
  return "?";
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Ongoing: return "ongoing";
    case Outcome::Correct: return "correct";
    case Outcome::Wrong: return "wrong";
    case Outcome::Timeout: return "timeout";
  }
  return "?";
}

std::string episode_record_line(const EpisodeRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%lld,%s,%s,%.0f,%d", r.episode, r.word.c_str(),
                outcome_name(r.outcome), r.reward, r.decisions);
  return buf;
}

double leftward_offset(const AgentPose& pose, double px, double py) {
  double lx = -std::sin(pose.heading), ly = std::cos(pose.heading);
  return (px - pose.x) * lx + (py - pose.y) * ly;
}

EpisodeSpec World::sample_episode(int word_id, RngStream& rng,
                                  const EpisodeConstraints& constraints) const {
  const WordClass cls = vocab_.cls(word_id);
  std::vector<int> shapes =
      constraints.allowed_shapes.empty() ? full_range(kNumShapes) : constraints.allowed_shapes;
  std::vector<int> colours =
      constraints.allowed_colours.empty() ? full_range(kNumColours) : constraints.allowed_colours;
  if (shapes.empty() || colours.empty())
    throw std::invalid_argument("sample_episode: empty attribute pool for word '" +
                                vocab_.word(word_id) + "'");

  auto finish = [&](ObjectInstance target, ObjectInstance confounder) {
    return assemble_episode(word_id, std::move(target), std::move(confounder), rng);
  };
  auto coloured = [&](int colour_idx) { return apply_colour(palette()[colour_idx], rng); };

  switch (cls) {
    case WordClass::Shape: {
      const int s = vocab_.attr(word_id);
      std::vector<int> others = without(shapes, s);
      if (others.empty())
        throw std::invalid_argument("sample_episode: no confounder shape available for '" +
                                    vocab_.word(word_id) + "'");
      ObjectInstance t, c;
      t.shape_id = s;
      c.shape_id = draw_from(others, rng);
      t.base_colour = coloured(draw_from(colours, rng));
      c.base_colour = coloured(draw_from(colours, rng));
      return finish(t, c);
    }
    case WordClass::Colour: {
      const int col = vocab_.attr(word_id);
      std::vector<int> other_cols = without(colours, col);
      if (other_cols.empty() || shapes.size() < 2)
        throw std::invalid_argument("sample_episode: pools too small for colour word '" +
                                    vocab_.word(word_id) + "'");
      ObjectInstance t, c;
      t.shape_id = draw_from(shapes, rng);
      c.shape_id = draw_from(without(shapes, t.shape_id), rng);
      t.base_colour = coloured(col);
      c.base_colour = coloured(draw_from(other_cols, rng));
      return finish(t, c);
    }
    case WordClass::Pattern: {
      if (shapes.size() < 2)
        throw std::invalid_argument("sample_episode: pools too small for pattern word");
      Pattern target_p = vocab_.attr(word_id) == 0 ? Pattern::Pinstriped : Pattern::Dotted;
      Pattern other_p = vocab_.attr(word_id) == 0 ? Pattern::Dotted : Pattern::Pinstriped;
      ObjectInstance t, c;
      t.pattern = target_p;
      c.pattern = rng.uniform_int(2) == 0 ? Pattern::None : other_p;
      t.shape_id = draw_from(shapes, rng);
      c.shape_id = draw_from(without(shapes, t.shape_id), rng);
      t.base_colour = coloured(draw_from(colours, rng));
      c.base_colour = coloured(draw_from(colours, rng));
      return finish(t, c);
    }
    case WordClass::Shade: {
      // Same shape, same realized colour; only the shade factor separates
      // the two objects. darker -> 0.55, lighter -> 1.4.
      ObjectInstance t, c;
      t.shape_id = c.shape_id = draw_from(shapes, rng);
      Rgb shared = coloured(draw_from(colours, rng));
      t.base_colour = c.base_colour = shared;
      bool word_is_darker = vocab_.attr(word_id) == 1;
      t.shade_factor = word_is_darker ? 0.55f : 1.4f;
      c.shade_factor = word_is_darker ? 1.4f : 0.55f;
      return finish(t, c);
    }
    case WordClass::Direction: {
      if (shapes.size() < 2)
        throw std::invalid_argument("sample_episode: pools too small for direction word");
      for (int attempt = 0; attempt < 64; ++attempt) {
        ObjectInstance a, b;
        a.shape_id = draw_from(shapes, rng);
        b.shape_id = draw_from(without(shapes, a.shape_id), rng);
        a.base_colour = coloured(draw_from(colours, rng));
        b.base_colour = coloured(draw_from(colours, rng));
        EpisodeSpec spec = finish(a, b);
        double off_t = leftward_offset(spec.start, spec.target.x, spec.target.y);
        double off_c = leftward_offset(spec.start, spec.confounder.x, spec.confounder.y);
        if (std::abs(off_t - off_c) < 1e-9) continue;  // tie: resample
        bool target_is_left = off_t > off_c;
        bool word_is_left = vocab_.attr(word_id) == 0;
        if (target_is_left != word_is_left) std::swap(spec.target, spec.confounder);
        return spec;
      }
      throw std::runtime_error("sample_episode: direction tie persisted across resamples");
    }
    case WordClass::Ambiguous: {
      const int s_a = vocab_.ambiguous_shape(word_id);
      const int c_a = vocab_.ambiguous_colour(word_id);
      std::vector<int> conf_shapes = without(shapes, s_a);
      std::vector<int> conf_colours = without(colours, c_a);
      if (conf_shapes.empty() || conf_colours.empty())
        throw std::invalid_argument("sample_episode: pools too small for ambiguous word '" +
                                    vocab_.word(word_id) + "'");
      ObjectInstance t, c;
      t.shape_id = s_a;
      t.base_colour = coloured(c_a);
      c.shape_id = draw_from(conf_shapes, rng);
      c.base_colour = coloured(draw_from(conf_colours, rng));
      return finish(t, c);
    }
  }
  throw std::logic_error("sample_episode: unhandled word class");
}

EpisodeSpec World::assemble_episode(int word_id, ObjectInstance target,
                                    ObjectInstance confounder, RngStream& rng) const {
  EpisodeSpec spec;
  spec.word_id = word_id;
  int target_slot = static_cast<int>(rng.uniform_int(2));
  target.x = cfg_.slot_x[target_slot];
  target.y = cfg_.slot_y;
  confounder.x = cfg_.slot_x[1 - target_slot];
  confounder.y = cfg_.slot_y;
  target.rotation_phase = rng.uniform(0.0, 2 * kPi);
  confounder.rotation_phase = rng.uniform(0.0, 2 * kPi);
  spec.target = std::move(target);
  spec.confounder = std::move(confounder);
  spec.start.x = rng.uniform(cfg_.start_x_min, cfg_.start_x_max);
  spec.start.y = rng.uniform(cfg_.start_y_min, cfg_.start_y_max);
  spec.start.heading =
      -kPi / 2 + rng.uniform(-deg(cfg_.heading_jitter_deg), deg(cfg_.heading_jitter_deg));
  return spec;
}

WorldState World::reset(const EpisodeSpec& spec) const {
  WorldState s;
  s.spec = spec;
  s.pose = spec.start;
  s.decision_step = 0;
  s.target_phase = spec.target.rotation_phase;
  s.confounder_phase = spec.confounder.rotation_phase;
  s.terminal = false;
  return s;
}

StepResult World::step(const WorldState& state, Action action) const {
  if (state.terminal) throw std::logic_error("step: episode already terminal");
  StepResult res;
  res.next = state;
  AgentPose& pose = res.next.pose;

  double fx = std::cos(pose.heading), fy = std::sin(pose.heading);
  double lx = -fy, ly = fx;
  double dx = 0, dy = 0, dh = 0;
  const double t = cfg_.translate_per_microstep;
  switch (action) {
    case Action::MoveForward: dx = fx * t; dy = fy * t; break;
    case Action::MoveBack: dx = -fx * t; dy = -fy * t; break;
    case Action::MoveLeft:
    case Action::StrafeLeft: dx = lx * t; dy = ly * t; break;
    case Action::MoveRight:
    case Action::StrafeRight: dx = -lx * t; dy = -ly * t; break;
    case Action::LookLeft: dh = deg(cfg_.rotate_per_microstep_deg); break;
    case Action::LookRight: dh = -deg(cfg_.rotate_per_microstep_deg); break;
  }

  auto bumped = [&](const ObjectInstance& o) {
    double ddx = pose.x - o.x, ddy = pose.y - o.y;
    return ddx * ddx + ddy * ddy <= cfg_.bump_radius * cfg_.bump_radius;
  };

  for (int micro = 0; micro < cfg_.action_repeat && res.outcome == Outcome::Ongoing; ++micro) {
    pose.x = std::clamp(pose.x + dx, 0.0, cfg_.room_w);
    pose.y = std::clamp(pose.y + dy, 0.0, cfg_.room_h);
    pose.heading = wrap_angle(pose.heading + dh);
    if (bumped(state.spec.target)) {
      res.outcome = Outcome::Correct;
      res.reward = 10;
    } else if (bumped(state.spec.confounder)) {
      res.outcome = Outcome::Wrong;
      res.reward = -10;
    }
  }

  res.next.decision_step = state.decision_step + 1;
  double spin = deg(cfg_.object_spin_per_decision_deg);
  res.next.target_phase = wrap_angle(res.next.target_phase + spin);
  res.next.confounder_phase = wrap_angle(res.next.confounder_phase + spin);

  if (res.outcome == Outcome::Ongoing && res.next.decision_step >= cfg_.max_decisions) {
    res.outcome = Outcome::Timeout;
    res.reward = 0;
  }
  res.terminal = res.outcome != Outcome::Ongoing;
  res.next.terminal = res.terminal;
  return res;
}

Action World::scripted_oracle_policy(const WorldState& state) const {
  // Mirrors how trained agents behave: walk to a vantage point, inspect
  // both objects in turn, then commit. Beelining would finish in ~15
  // decisions; typical episodes run several times that.
  const int inspect_start = 12, inspect_end = 36;
  const int step = state.decision_step;
  auto face_or = [&](double px, double py, Action otherwise) {
    double desired = std::atan2(py - state.pose.y, px - state.pose.x);
    double err = wrap_angle(desired - state.pose.heading);
    if (std::abs(err) > deg(20.0)) return err > 0 ? Action::LookLeft : Action::LookRight;
    return otherwise;
  };
  Action sway = step % 2 ? Action::StrafeRight : Action::StrafeLeft;
  if (step < inspect_start) {
    double vx = 0.5 * (cfg_.slot_x[0] + cfg_.slot_x[1]);
    double vy = cfg_.slot_y + 3.1;
    double dx = vx - state.pose.x, dy = vy - state.pose.y;
    if (dx * dx + dy * dy > 0.36) return face_or(vx, vy, Action::MoveForward);
    return sway;
  }
  if (step < inspect_end) {
    bool left_half = step < (inspect_start + inspect_end) / 2;
    return face_or(cfg_.slot_x[left_half ? 0 : 1], cfg_.slot_y, sway);
  }
  const ObjectInstance& t = state.spec.target;
  return face_or(t.x, t.y, Action::MoveForward);
}

bool World::is_correct(const EpisodeSpec& spec, const ObjectInstance& object) const {
  switch (vocab_.cls(spec.word_id)) {
    case WordClass::Shape:
      return object.shape_id == vocab_.attr(spec.word_id);
    case WordClass::Colour:
      return nearest_palette_index(object.base_colour) == vocab_.attr(spec.word_id);
    case WordClass::Pattern: {
      Pattern want = vocab_.attr(spec.word_id) == 0 ? Pattern::Pinstriped : Pattern::Dotted;
      return object.pattern == want;
    }
    case WordClass::Shade:
      return vocab_.attr(spec.word_id) == 1 ? object.shade_factor < 1.0f
                                            : object.shade_factor > 1.0f;
    case WordClass::Direction: {
      // Compare against the episode's other object in the start frame.
      const ObjectInstance& other =
          (object.x == spec.target.x && object.y == spec.target.y) ? spec.confounder : spec.target;
      double mine = leftward_offset(spec.start, object.x, object.y);
      double theirs = leftward_offset(spec.start, other.x, other.y);
      return vocab_.attr(spec.word_id) == 0 ? mine > theirs : mine < theirs;
    }
    case WordClass::Ambiguous:
      return object.shape_id == vocab_.ambiguous_shape(spec.word_id);
  }
  return false;
}

}  // namespace gwla
