#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gwla/tensor.hpp"
#include "gwla/world.hpp"

namespace gwla {

struct RenderConfig {
  int side = 84;              // square frame, CHW layout 3 x side x side
  double hfov_deg = 90.0;
  double eye_height = 1.0;    // metres
  double object_scale = 1.2;  // metres per silhouette unit
  double wall_height = 2.5;
  double near_z = 0.05;
  double light_dir[3] = {-0.35, 0.25, 0.90};  // normalized internally
};

/// Frame plus a per-pixel visibility mask: 0 background, 1 target,
/// 2 confounder (row-major side x side).
struct RenderOutput {
  Tensor frame;
  std::vector<uint8_t> mask;
};

Tensor render(const WorldState& state, const WorldConfig& wcfg, const RenderConfig& rcfg = {});
RenderOutput render_full(const WorldState& state, const WorldConfig& wcfg,
                         const RenderConfig& rcfg = {});

/// Canonical single-object view: the object stands alone at the given
/// distance straight ahead, spun to `yaw`. Used for template matching.
Tensor render_object_view(int shape_id, double yaw, const Rgb& colour, Pattern pattern,
                          float shade, double distance, const RenderConfig& rcfg = {});

/// Local-albedo decoration contracts. `u`,`v` are object-local metres
/// (u horizontal across the silhouette, v height above its base).
using AlbedoFn = std::function<Rgb(double u, double v)>;

/// Multiplier applied by a pattern at a local point: 1 outside the motif,
/// 0.35 on pinstripe bands / dots. Band width is 8% of the silhouette
/// width; dots sit on a square grid of pitch 16% of the width.
float pattern_factor(Pattern pattern, double u, double v, double width);

AlbedoFn apply_pattern(AlbedoFn base, Pattern pattern, double silhouette_width);
Rgb apply_shade(const Rgb& albedo, float factor);

/// Binary PPM (P6, max 255), value = round(255 * v).
void write_ppm(const std::string& path, const Tensor& frame);

}  // namespace gwla
