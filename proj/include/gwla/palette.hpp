#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "gwla/rng.hpp"
#include "gwla/vocab.hpp"

namespace gwla {

struct Rgb {
  float r = 0, g = 0, b = 0;
};

inline float rgb_distance(const Rgb& a, const Rgb& b) {
  return std::sqrt((a.r - b.r) * (a.r - b.r) + (a.g - b.g) * (a.g - b.g) +
                   (a.b - b.b) * (a.b - b.b));
}

/// Prototype colours, indexed like Vocabulary::colour_words(). Pairwise L2
/// distance ≥ 0.3 so per-channel noise (σ=0.03) never flips the nearest
/// prototype.
inline const std::array<Rgb, kNumColours>& palette() {
  static const std::array<Rgb, kNumColours> p = {{
      {0.10f, 0.20f, 0.90f},  // blue
      {0.45f, 0.30f, 0.10f},  // brown
      {1.00f, 0.60f, 0.75f},  // pink
      {0.95f, 0.90f, 0.10f},  // yellow
      {0.85f, 0.10f, 0.10f},  // red
      {0.10f, 0.75f, 0.15f},  // green
      {0.10f, 0.85f, 0.90f},  // cyan
      {0.90f, 0.10f, 0.85f},  // magenta
      {0.55f, 0.55f, 0.55f},  // grey
      {0.50f, 0.15f, 0.80f},  // purple
  }};
  return p;
}

/// Room surfaces stay off-palette so the background never matches a colour
/// word.
inline Rgb wall_colour() { return {0.68f, 0.645f, 0.585f}; }
inline Rgb floor_colour() { return {0.225f, 0.24f, 0.25f}; }
inline Rgb ceiling_colour() { return {0.78f, 0.80f, 0.82f}; }

inline int nearest_palette_index(const Rgb& c) {
  int best = 0;
  float best_d = rgb_distance(c, palette()[0]);
  for (int i = 1; i < kNumColours; ++i) {
    float d = rgb_distance(c, palette()[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

/// Per-channel Gaussian noise (clamped); each object instance draws its own
/// colour once per episode.
inline Rgb apply_colour(const Rgb& prototype, RngStream& rng, double sigma = 0.03) {
  auto jitter = [&](float v) {
    double out = v + sigma * rng.normal();
    return static_cast<float>(std::clamp(out, 0.0, 1.0));
  };
  return {jitter(prototype.r), jitter(prototype.g), jitter(prototype.b)};
}

}  // namespace gwla
