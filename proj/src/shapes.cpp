#include "gwla/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gwla {

namespace {

using P = std::array<float, 2>;
using Poly = std::vector<P>;

Poly regular_gon(int n, float cx, float cy, float r, float start_deg) {
  Poly out;
  for (int i = 0; i < n; ++i) {
    double a = (start_deg + 360.0 * i / n) * std::numbers::pi / 180.0;
    out.push_back({cx + r * static_cast<float>(std::cos(a)),
                   cy + r * static_cast<float>(std::sin(a))});
  }
  return out;
}

Poly flower_poly() {
  // 8-petal star around (0, 0.70); the bottom petal is replaced by a stem.
  Poly out;
  const float cx = 0.0f, cy = 0.70f, ro = 0.28f, ri = 0.13f;
  for (int i = 0; i < 16; ++i) {
    double a = (90.0 + 22.5 * i) * std::numbers::pi / 180.0;
    float r = (i % 2 == 0) ? ro : ri;
    float px = cx + r * static_cast<float>(std::cos(a));
    float py = cy + r * static_cast<float>(std::sin(a));
    if (i == 8) {  // bottom outer petal becomes the stem detour
      out.push_back({-0.03f, 0.46f});
      out.push_back({-0.03f, 0.0f});
      out.push_back({0.03f, 0.0f});
      out.push_back({0.03f, 0.46f});
      continue;
    }
    out.push_back({px, py});
  }
  return out;
}

double signed_area(const Poly& poly) {
  double a = 0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const P& p = poly[i];
    const P& q = poly[(i + 1) % poly.size()];
    a += static_cast<double>(p[0]) * q[1] - static_cast<double>(q[0]) * p[1];
  }
  return 0.5 * a;
}

std::vector<ShapePrototype> build_prototypes() {
  std::vector<ShapePrototype> s(40);
  // chair (side profile)
  s[0] = {{{-0.40f, 0.00f}, {-0.28f, 0.00f}, {-0.28f, 0.45f}, {0.28f, 0.45f}, {0.28f, 0.00f},
           {0.40f, 0.00f}, {0.40f, 0.55f}, {-0.24f, 0.55f}, {-0.24f, 1.00f}, {-0.40f, 1.00f}},
          0.34f};
  // suitcase
  s[1] = {{{-0.45f, 0.00f}, {0.45f, 0.00f}, {0.45f, 0.62f}, {0.14f, 0.62f}, {0.14f, 0.76f},
           {-0.14f, 0.76f}, {-0.14f, 0.62f}, {-0.45f, 0.62f}},
          0.16f};
  // tv (body, feet, V antenna)
  s[2] = {{{-0.32f, 0.00f}, {-0.24f, 0.00f}, {-0.24f, 0.12f}, {0.24f, 0.12f}, {0.24f, 0.00f},
           {0.32f, 0.00f}, {0.32f, 0.12f}, {0.42f, 0.12f}, {0.42f, 0.75f}, {0.10f, 0.75f},
           {0.26f, 1.00f}, {0.18f, 1.00f}, {0.04f, 0.78f}, {-0.04f, 0.78f}, {-0.18f, 1.00f},
           {-0.26f, 1.00f}, {-0.10f, 0.75f}, {-0.42f, 0.75f}, {-0.42f, 0.12f}, {-0.32f, 0.12f}},
          0.30f};
  // ball
  s[3] = {regular_gon(12, 0.0f, 0.50f, 0.48f, 90.0f), 0.48f};
  // balloon (teardrop with knot)
  s[4] = {{{0.00f, 0.96f}, {-0.22f, 0.88f}, {-0.33f, 0.70f}, {-0.30f, 0.48f}, {-0.14f, 0.33f},
           {-0.05f, 0.28f}, {-0.08f, 0.20f}, {0.08f, 0.20f}, {0.05f, 0.28f}, {0.14f, 0.33f},
           {0.30f, 0.48f}, {0.33f, 0.70f}, {0.22f, 0.88f}},
          0.33f};
  // cow (boxy quadruped, low head block)
  s[5] = {{{-0.44f, 0.60f}, {-0.44f, 0.30f}, {-0.36f, 0.30f}, {-0.36f, 0.02f}, {-0.26f, 0.02f},
           {-0.26f, 0.30f}, {0.02f, 0.30f}, {0.02f, 0.02f}, {0.12f, 0.02f}, {0.12f, 0.30f},
           {0.26f, 0.30f}, {0.26f, 0.44f}, {0.48f, 0.44f}, {0.48f, 0.72f}, {0.26f, 0.72f},
           {0.22f, 0.84f}, {0.16f, 0.72f}},
          0.26f};
  // zebra (raised neck and head)
  s[6] = {{{-0.42f, 0.56f}, {-0.42f, 0.30f}, {-0.36f, 0.30f}, {-0.36f, 0.02f}, {-0.28f, 0.02f},
           {-0.28f, 0.30f}, {0.00f, 0.30f}, {0.00f, 0.02f}, {0.08f, 0.02f}, {0.08f, 0.30f},
           {0.20f, 0.30f}, {0.30f, 0.48f}, {0.42f, 0.82f}, {0.48f, 0.96f}, {0.34f, 0.96f},
           {0.30f, 0.80f}, {0.22f, 0.56f}},
          0.22f};
  // cake (two tiers and a candle)
  s[7] = {{{-0.45f, 0.00f}, {0.45f, 0.00f}, {0.45f, 0.35f}, {0.30f, 0.35f}, {0.30f, 0.62f},
           {0.04f, 0.62f}, {0.04f, 0.88f}, {-0.04f, 0.88f}, {-0.04f, 0.62f}, {-0.30f, 0.62f},
           {-0.30f, 0.35f}, {-0.45f, 0.35f}},
          0.40f};
  // can (cylinder with pull tab)
  s[8] = {{{-0.28f, 0.00f}, {0.28f, 0.00f}, {0.28f, 0.78f}, {0.10f, 0.78f}, {0.10f, 0.88f},
           {-0.10f, 0.88f}, {-0.10f, 0.78f}, {-0.28f, 0.78f}},
          0.42f};
  // cassette (flat and wide, chamfered)
  s[9] = {{{-0.48f, 0.18f}, {-0.30f, 0.18f}, {-0.30f, 0.10f}, {0.30f, 0.10f}, {0.30f, 0.18f},
           {0.48f, 0.18f}, {0.48f, 0.52f}, {0.40f, 0.60f}, {-0.40f, 0.60f}, {-0.48f, 0.52f}},
          0.10f};
  // guitar (figure-eight body, neck, headstock)
  s[10] = {{{-0.06f, 1.00f}, {0.06f, 1.00f}, {0.09f, 0.98f}, {0.09f, 0.86f}, {0.04f, 0.86f},
            {0.04f, 0.62f}, {0.18f, 0.58f}, {0.26f, 0.48f}, {0.20f, 0.38f}, {0.30f, 0.26f},
            {0.26f, 0.08f}, {0.10f, 0.00f}, {-0.10f, 0.00f}, {-0.26f, 0.08f}, {-0.30f, 0.26f},
            {-0.20f, 0.38f}, {-0.26f, 0.48f}, {-0.18f, 0.58f}, {-0.04f, 0.62f}, {-0.04f, 0.86f},
            {-0.09f, 0.86f}, {-0.09f, 0.98f}},
           0.18f};
  // hair-brush (paddle)
  s[11] = {{{-0.07f, 0.00f}, {0.07f, 0.00f}, {0.07f, 0.42f}, {0.16f, 0.42f}, {0.16f, 0.88f},
            {0.08f, 0.95f}, {-0.08f, 0.95f}, {-0.16f, 0.88f}, {-0.16f, 0.42f}, {-0.07f, 0.42f}},
           0.14f};
  // hat (top hat: brim plus crown)
  s[12] = {{{-0.48f, 0.00f}, {0.48f, 0.00f}, {0.48f, 0.08f}, {0.22f, 0.08f}, {0.22f, 0.60f},
            {-0.22f, 0.60f}, {-0.22f, 0.08f}, {-0.48f, 0.08f}},
           0.40f};
  // ice-lolly (slab on a stick)
  s[13] = {{{-0.20f, 0.28f}, {-0.04f, 0.28f}, {-0.04f, 0.00f}, {0.04f, 0.00f}, {0.04f, 0.28f},
            {0.20f, 0.28f}, {0.20f, 0.78f}, {0.12f, 0.92f}, {-0.12f, 0.92f}, {-0.20f, 0.78f}},
           0.14f};
  // ladder (rail with rungs, comb profile)
  s[14] = {{{-0.30f, 0.00f}, {-0.14f, 0.00f}, {-0.14f, 0.14f}, {0.30f, 0.14f}, {0.30f, 0.26f},
            {-0.14f, 0.26f}, {-0.14f, 0.42f}, {0.30f, 0.42f}, {0.30f, 0.54f}, {-0.14f, 0.54f},
            {-0.14f, 0.70f}, {0.30f, 0.70f}, {0.30f, 0.82f}, {-0.14f, 0.82f}, {-0.14f, 1.00f},
            {-0.30f, 1.00f}},
           0.12f};
  // mug (cup with handle block)
  s[15] = {{{-0.30f, 0.00f}, {0.30f, 0.00f}, {0.30f, 0.30f}, {0.46f, 0.30f}, {0.46f, 0.58f},
            {0.30f, 0.58f}, {0.30f, 0.70f}, {-0.30f, 0.70f}},
           0.34f};
  // pencil (faceted tip, notched base)
  s[16] = {{{-0.10f, 0.00f}, {-0.02f, 0.00f}, {-0.02f, 0.04f}, {0.02f, 0.04f}, {0.02f, 0.00f},
            {0.10f, 0.00f}, {0.10f, 0.74f}, {0.035f, 0.90f}, {0.00f, 1.00f}, {-0.035f, 0.90f},
            {-0.10f, 0.74f}},
           0.10f};
  // toothbrush (offset head)
  s[17] = {{{-0.06f, 0.00f}, {0.06f, 0.00f}, {0.06f, 0.55f}, {0.10f, 0.60f}, {0.10f, 0.95f},
            {-0.02f, 0.95f}, {-0.02f, 0.60f}, {-0.06f, 0.55f}},
           0.08f};
  // key (diamond bow, toothed blade)
  s[18] = {{{0.00f, 0.98f}, {-0.20f, 0.80f}, {-0.05f, 0.62f}, {-0.05f, 0.00f}, {0.14f, 0.00f},
            {0.14f, 0.08f}, {0.05f, 0.08f}, {0.05f, 0.16f}, {0.14f, 0.16f}, {0.14f, 0.24f},
            {0.05f, 0.24f}, {0.05f, 0.62f}, {0.20f, 0.80f}},
           0.08f};
  // bottle
  s[19] = {{{-0.22f, 0.00f}, {0.22f, 0.00f}, {0.22f, 0.55f}, {0.08f, 0.68f}, {0.08f, 0.92f},
            {0.10f, 0.92f}, {0.10f, 1.00f}, {-0.10f, 1.00f}, {-0.10f, 0.92f}, {-0.08f, 0.92f},
            {-0.08f, 0.68f}, {-0.22f, 0.55f}},
           0.22f};
  // car (side view with wheel bumps)
  s[20] = {{{-0.48f, 0.12f}, {-0.40f, 0.12f}, {-0.38f, 0.02f}, {-0.24f, 0.02f}, {-0.22f, 0.12f},
            {0.20f, 0.12f}, {0.22f, 0.02f}, {0.36f, 0.02f}, {0.38f, 0.12f}, {0.48f, 0.12f},
            {0.48f, 0.32f}, {0.28f, 0.36f}, {0.16f, 0.55f}, {-0.20f, 0.55f}, {-0.34f, 0.36f},
            {-0.48f, 0.32f}},
           0.30f};
  // cherries (two lobes on forked stems)
  s[21] = {{{-0.03f, 1.00f}, {0.03f, 1.00f}, {0.20f, 0.48f}, {0.34f, 0.42f}, {0.40f, 0.28f},
            {0.33f, 0.13f}, {0.18f, 0.09f}, {0.07f, 0.18f}, {0.06f, 0.33f}, {0.13f, 0.44f},
            {0.00f, 0.80f}, {-0.13f, 0.42f}, {-0.05f, 0.32f}, {-0.06f, 0.17f}, {-0.18f, 0.08f},
            {-0.33f, 0.12f}, {-0.40f, 0.27f}, {-0.33f, 0.42f}, {-0.20f, 0.47f}},
           0.24f};
  // fork (three tines)
  s[22] = {{{-0.07f, 0.00f}, {0.07f, 0.00f}, {0.07f, 0.55f}, {0.16f, 0.55f}, {0.16f, 1.00f},
            {0.085f, 1.00f}, {0.085f, 0.62f}, {0.035f, 0.62f}, {0.035f, 1.00f}, {-0.035f, 1.00f},
            {-0.035f, 0.62f}, {-0.085f, 0.62f}, {-0.085f, 1.00f}, {-0.16f, 1.00f}, {-0.16f, 0.55f},
            {-0.07f, 0.55f}},
           0.08f};
  // fridge (tall box with handle)
  s[23] = {{{-0.32f, 0.00f}, {0.32f, 0.00f}, {0.32f, 0.60f}, {0.38f, 0.60f}, {0.38f, 0.78f},
            {0.32f, 0.78f}, {0.32f, 0.96f}, {-0.32f, 0.96f}},
           0.44f};
  // hammer (claw head)
  s[24] = {{{-0.06f, 0.00f}, {0.06f, 0.00f}, {0.06f, 0.70f}, {0.34f, 0.70f}, {0.34f, 0.92f},
            {-0.20f, 0.92f}, {-0.34f, 0.78f}, {-0.06f, 0.78f}},
           0.14f};
  // knife (blade wider than the grip)
  s[25] = {{{-0.07f, 0.00f}, {0.07f, 0.00f}, {0.07f, 0.34f}, {0.20f, 0.36f}, {0.18f, 0.60f},
            {0.10f, 0.84f}, {-0.02f, 1.00f}, {-0.08f, 0.70f}, {-0.09f, 0.36f}, {-0.07f, 0.34f}},
           0.06f};
  // spoon (oval bowl)
  s[26] = {{{-0.05f, 0.00f}, {0.05f, 0.00f}, {0.05f, 0.52f}, {0.16f, 0.58f}, {0.20f, 0.72f},
            {0.14f, 0.88f}, {0.00f, 0.94f}, {-0.14f, 0.88f}, {-0.20f, 0.72f}, {-0.16f, 0.58f},
            {-0.05f, 0.52f}},
           0.10f};
  // apple (round body, stem)
  s[27] = {{{0.02f, 0.70f}, {0.10f, 0.76f}, {0.26f, 0.74f}, {0.38f, 0.60f}, {0.40f, 0.40f},
            {0.33f, 0.20f}, {0.18f, 0.06f}, {0.00f, 0.02f}, {-0.18f, 0.06f}, {-0.33f, 0.20f},
            {-0.40f, 0.40f}, {-0.38f, 0.60f}, {-0.26f, 0.74f}, {-0.10f, 0.76f}, {-0.02f, 0.70f},
            {-0.03f, 0.84f}, {0.00f, 0.88f}, {0.03f, 0.84f}},
           0.38f};
  // banana (crescent)
  s[28] = {{{-0.42f, 0.20f}, {-0.30f, 0.08f}, {-0.10f, 0.02f}, {0.12f, 0.04f}, {0.30f, 0.14f},
            {0.40f, 0.30f}, {0.44f, 0.46f}, {0.36f, 0.44f}, {0.28f, 0.30f}, {0.12f, 0.18f},
            {-0.08f, 0.14f}, {-0.26f, 0.18f}, {-0.38f, 0.30f}},
           0.14f};
  // flower (petal star on a stem)
  s[29] = {flower_poly(), 0.10f};
  // jug (spout left, handle right)
  s[30] = {{{-0.30f, 0.00f}, {0.30f, 0.00f}, {0.30f, 0.26f}, {0.46f, 0.26f}, {0.46f, 0.54f},
            {0.30f, 0.58f}, {0.30f, 0.68f}, {-0.14f, 0.68f}, {-0.30f, 0.80f}, {-0.24f, 0.62f},
            {-0.30f, 0.56f}},
           0.30f};
  // pig (short legs, snout block)
  s[31] = {{{-0.44f, 0.50f}, {-0.44f, 0.16f}, {-0.36f, 0.16f}, {-0.36f, 0.02f}, {-0.26f, 0.02f},
            {-0.26f, 0.16f}, {0.06f, 0.16f}, {0.06f, 0.02f}, {0.16f, 0.02f}, {0.16f, 0.16f},
            {0.30f, 0.16f}, {0.30f, 0.34f}, {0.48f, 0.34f}, {0.48f, 0.46f}, {0.30f, 0.50f},
            {0.24f, 0.62f}, {-0.30f, 0.62f}},
           0.30f};
  // pincer (forked jaws)
  s[32] = {{{-0.05f, 0.00f}, {0.05f, 0.00f}, {0.05f, 0.40f}, {0.28f, 0.62f}, {0.34f, 0.86f},
            {0.22f, 0.80f}, {0.12f, 0.62f}, {0.00f, 0.52f}, {-0.12f, 0.62f}, {-0.22f, 0.80f},
            {-0.34f, 0.86f}, {-0.28f, 0.62f}, {-0.05f, 0.40f}},
           0.10f};
  // plant (pot with leaf spikes)
  s[33] = {{{-0.26f, 0.00f}, {0.26f, 0.00f}, {0.20f, 0.30f}, {0.04f, 0.30f}, {0.28f, 0.52f},
            {0.42f, 0.80f}, {0.26f, 0.72f}, {0.10f, 0.50f}, {0.14f, 0.86f}, {0.02f, 0.66f},
            {-0.10f, 0.92f}, {-0.16f, 0.62f}, {-0.36f, 0.74f}, {-0.22f, 0.44f}, {-0.04f, 0.30f},
            {-0.20f, 0.30f}},
           0.18f};
  // saxophone (J tube with bell)
  s[34] = {{{-0.20f, 0.96f}, {-0.08f, 1.00f}, {-0.04f, 0.92f}, {-0.10f, 0.60f}, {-0.10f, 0.24f},
            {0.00f, 0.08f}, {0.18f, 0.04f}, {0.34f, 0.10f}, {0.42f, 0.28f}, {0.44f, 0.44f},
            {0.30f, 0.36f}, {0.26f, 0.22f}, {0.12f, 0.18f}, {0.04f, 0.26f}, {0.04f, 0.58f},
            {0.00f, 0.90f}},
           0.14f};
  // shoe (boot, toe to the right)
  s[35] = {{{-0.46f, 0.00f}, {0.46f, 0.00f}, {0.46f, 0.12f}, {0.30f, 0.22f}, {0.10f, 0.26f},
            {0.00f, 0.48f}, {-0.10f, 0.62f}, {-0.30f, 0.62f}, {-0.34f, 0.30f}, {-0.46f, 0.22f}},
           0.18f};
  // tennis-racket (octagonal head, shaft, grip)
  s[36] = {{{0.00f, 0.98f}, {-0.18f, 0.92f}, {-0.26f, 0.74f}, {-0.18f, 0.56f}, {-0.04f, 0.50f},
            {-0.04f, 0.18f}, {-0.07f, 0.18f}, {-0.07f, 0.00f}, {0.07f, 0.00f}, {0.07f, 0.18f},
            {0.04f, 0.18f}, {0.04f, 0.50f}, {0.18f, 0.56f}, {0.26f, 0.74f}, {0.18f, 0.92f}},
           0.10f};
  // tomato (squat, jagged calyx)
  s[37] = {{{0.00f, 0.84f}, {0.10f, 0.90f}, {0.06f, 0.78f}, {0.22f, 0.88f}, {0.16f, 0.72f},
            {0.36f, 0.62f}, {0.40f, 0.42f}, {0.30f, 0.20f}, {0.12f, 0.08f}, {-0.12f, 0.08f},
            {-0.30f, 0.20f}, {-0.40f, 0.42f}, {-0.36f, 0.62f}, {-0.16f, 0.72f}, {-0.22f, 0.88f},
            {-0.06f, 0.78f}, {-0.10f, 0.90f}},
           0.36f};
  // tree (stacked canopy on a trunk)
  s[38] = {{{-0.08f, 0.00f}, {0.08f, 0.00f}, {0.08f, 0.18f}, {0.36f, 0.18f}, {0.14f, 0.52f},
            {0.28f, 0.50f}, {0.00f, 0.96f}, {-0.28f, 0.50f}, {-0.14f, 0.52f}, {-0.36f, 0.18f},
            {-0.08f, 0.18f}},
           0.26f};
  // wine-glass
  s[39] = {{{-0.22f, 0.96f}, {0.22f, 0.96f}, {0.20f, 0.74f}, {0.06f, 0.58f}, {0.03f, 0.52f},
            {0.03f, 0.12f}, {0.16f, 0.06f}, {0.16f, 0.00f}, {-0.16f, 0.00f}, {-0.16f, 0.06f},
            {-0.03f, 0.12f}, {-0.03f, 0.52f}, {-0.06f, 0.58f}, {-0.20f, 0.74f}},
           0.16f};
  // Counterclockwise winding everywhere so extruded side faces get outward
  // normals.
  for (auto& proto : s)
    if (signed_area(proto.silhouette) < 0)
      std::reverse(proto.silhouette.begin(), proto.silhouette.end());
  return s;
}

}  // namespace

const ShapePrototype& shape_prototype(int shape_id) {
  static const std::vector<ShapePrototype> protos = build_prototypes();
  if (shape_id < 0 || shape_id >= static_cast<int>(protos.size()))
    throw std::invalid_argument("shape_prototype: id out of range: " + std::to_string(shape_id));
  return protos[static_cast<size_t>(shape_id)];
}

float silhouette_width(int shape_id) {
  const auto& poly = shape_prototype(shape_id).silhouette;
  float lo = poly[0][0], hi = poly[0][0];
  for (const auto& p : poly) {
    lo = std::min(lo, p[0]);
    hi = std::max(hi, p[0]);
  }
  return hi - lo;
}

}  // namespace gwla
