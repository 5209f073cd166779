#include "gwla/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "gwla/shapes.hpp"

namespace gwla {

namespace {

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator*(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
Vec3 normalize(const Vec3& v) {
  double n = std::sqrt(dot(v, v));
  return n > 0 ? v * (1.0 / n) : v;
}

struct Surface {
  std::vector<Vec3> pts;  // world space, planar simple polygon
  Vec3 normal;            // unit, faces the viewer side
  int tag = 0;            // 0 room, 1 target, 2 confounder
  Rgb base;
  Pattern pattern = Pattern::None;
  float shade = 1.0f;
  Vec3 origin;            // object-local frame for pattern lookup
  Vec3 axis_u;
  double pattern_width = 1.0;
  double sort_depth = 0;
};

struct Camera {
  Vec3 eye, fwd, right, up;
  double focal;  // pixels
  int side;
};

Camera make_camera(const AgentPose& pose, const RenderConfig& rcfg) {
  Camera c;
  c.eye = {pose.x, pose.y, rcfg.eye_height};
  c.fwd = {std::cos(pose.heading), std::sin(pose.heading), 0.0};
  c.up = {0.0, 0.0, 1.0};
  c.right = cross(c.fwd, c.up);
  c.side = rcfg.side;
  c.focal = (rcfg.side / 2.0) / std::tan(rcfg.hfov_deg * std::numbers::pi / 360.0);
  return c;
}

struct CamPoint {
  double x, y, z;  // camera space: x right, y up, z forward
};

CamPoint to_camera(const Camera& c, const Vec3& p) {
  Vec3 d = p - c.eye;
  return {dot(d, c.right), dot(d, c.up), dot(d, c.fwd)};
}

/// Sutherland-Hodgman clip against z >= near.
std::vector<CamPoint> clip_near(const std::vector<CamPoint>& in, double near_z) {
  std::vector<CamPoint> out;
  size_t n = in.size();
  for (size_t i = 0; i < n; ++i) {
    const CamPoint& a = in[i];
    const CamPoint& b = in[(i + 1) % n];
    bool a_in = a.z >= near_z, b_in = b.z >= near_z;
    if (a_in) out.push_back(a);
    if (a_in != b_in) {
      double t = (near_z - a.z) / (b.z - a.z);
      out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), near_z});
    }
  }
  return out;
}

void add_room_surfaces(std::vector<Surface>& surfaces, const WorldConfig& wcfg,
                       const RenderConfig& rcfg) {
  const double w = wcfg.room_w, h = wcfg.room_h, top = rcfg.wall_height;
  auto add = [&](std::vector<Vec3> pts, Vec3 n, Rgb col) {
    Surface s;
    s.pts = std::move(pts);
    s.normal = n;
    s.base = col;
    surfaces.push_back(std::move(s));
  };
  add({{0, 0, 0}, {w, 0, 0}, {w, h, 0}, {0, h, 0}}, {0, 0, 1}, floor_colour());
  add({{0, 0, top}, {w, 0, top}, {w, h, top}, {0, h, top}}, {0, 0, -1}, ceiling_colour());
  add({{0, 0, 0}, {w, 0, 0}, {w, 0, top}, {0, 0, top}}, {0, 1, 0}, wall_colour());
  add({{0, h, 0}, {w, h, 0}, {w, h, top}, {0, h, top}}, {0, -1, 0}, wall_colour());
  add({{0, 0, 0}, {0, h, 0}, {0, h, top}, {0, 0, top}}, {1, 0, 0}, wall_colour());
  add({{w, 0, 0}, {w, h, 0}, {w, h, top}, {w, 0, top}}, {-1, 0, 0}, wall_colour());
}

void add_object_surfaces(std::vector<Surface>& surfaces, const ObjectInstance& obj, double phase,
                         int tag, const RenderConfig& rcfg) {
  const ShapePrototype& proto = shape_prototype(obj.shape_id);
  const double scale = rcfg.object_scale;
  const double half_d = proto.depth * scale * 0.5;
  Vec3 axis_u = {std::cos(phase), std::sin(phase), 0.0};
  Vec3 axis_w = {-std::sin(phase), std::cos(phase), 0.0};
  Vec3 base_center = {obj.x, obj.y, 0.0};

  auto local_to_world = [&](float u, float v, double w) {
    return base_center + axis_u * (u * scale) + Vec3{0, 0, v * scale} + axis_w * w;
  };
  auto add_face = [&](std::vector<Vec3> pts, Vec3 n) {
    Surface s;
    s.pts = std::move(pts);
    s.normal = n;
    s.tag = tag;
    s.base = obj.base_colour;
    s.pattern = obj.pattern;
    s.shade = obj.shade_factor;
    s.origin = base_center;
    s.axis_u = axis_u;
    s.pattern_width = silhouette_width(obj.shape_id) * scale;
    surfaces.push_back(std::move(s));
  };

  const auto& poly = proto.silhouette;
  const size_t n = poly.size();
  std::vector<Vec3> front(n), back(n);
  for (size_t i = 0; i < n; ++i) {
    front[i] = local_to_world(poly[i][0], poly[i][1], half_d);
    back[i] = local_to_world(poly[i][0], poly[i][1], -half_d);
  }
  add_face(front, axis_w);
  add_face(back, axis_w * -1.0);
  for (size_t i = 0; i < n; ++i) {
    size_t j = (i + 1) % n;
    // Outward normal of the side quad spanning edge i->j across the depth.
    Vec3 edge = front[j] - front[i];
    Vec3 nrm = normalize(cross(edge, axis_w * -1.0));
    add_face({back[i], back[j], front[j], front[i]}, nrm);
  }
}

struct Raster {
  Tensor frame;
  std::vector<uint8_t> mask;
  int side;
};

void fill_surface(Raster& r, const Camera& cam, const Surface& s, const RenderConfig& rcfg,
                  const Vec3& light) {
  // Backface cull using any polygon vertex.
  if (dot(s.normal, s.pts[0] - cam.eye) >= 0) return;

  std::vector<CamPoint> cp(s.pts.size());
  for (size_t i = 0; i < s.pts.size(); ++i) cp[i] = to_camera(cam, s.pts[i]);
  std::vector<CamPoint> clipped = clip_near(cp, rcfg.near_z);
  if (clipped.size() < 3) return;

  const double cxy = r.side / 2.0;
  std::vector<double> sx(clipped.size()), sy(clipped.size());
  double min_y = 1e30, max_y = -1e30;
  for (size_t i = 0; i < clipped.size(); ++i) {
    sx[i] = cxy + cam.focal * clipped[i].x / clipped[i].z;
    sy[i] = cxy - cam.focal * clipped[i].y / clipped[i].z;
    min_y = std::min(min_y, sy[i]);
    max_y = std::max(max_y, sy[i]);
  }

  double lambert = 0.55 + 0.45 * std::max(0.0, dot(s.normal, light));
  Rgb shaded_base = apply_shade(s.base, s.shade);
  auto shade_px = [&](float v) { return static_cast<float>(std::clamp(v * lambert, 0.0, 1.0)); };
  Rgb flat = {shade_px(shaded_base.r), shade_px(shaded_base.g), shade_px(shaded_base.b)};

  float* plane_r = r.frame.ptr();
  float* plane_g = plane_r + r.side * r.side;
  float* plane_b = plane_g + r.side * r.side;

  // Per-pixel local coordinates come from a ray-plane intersection so
  // patterns stay glued to the object as it spins.
  Vec3 plane_pt = s.pts[0];
  bool needs_local = s.pattern != Pattern::None;

  int y0 = std::max(0, static_cast<int>(std::floor(min_y)));
  int y1 = std::min(r.side - 1, static_cast<int>(std::ceil(max_y)));
  std::vector<double> xs;
  for (int py = y0; py <= y1; ++py) {
    double yc = py + 0.5;
    xs.clear();
    size_t m = clipped.size();
    for (size_t i = 0; i < m; ++i) {
      size_t j = (i + 1) % m;
      double ya = sy[i], yb = sy[j];
      if ((ya <= yc && yb > yc) || (yb <= yc && ya > yc)) {
        double t = (yc - ya) / (yb - ya);
        xs.push_back(sx[i] + t * (sx[j] - sx[i]));
      }
    }
    if (xs.size() < 2) continue;
    std::sort(xs.begin(), xs.end());
    for (size_t k = 0; k + 1 < xs.size(); k += 2) {
      int x0 = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
      int x1 = std::min(r.side - 1, static_cast<int>(std::floor(xs[k + 1] - 0.5)));
      for (int px = x0; px <= x1; ++px) {
        size_t idx = static_cast<size_t>(py) * r.side + px;
        Rgb col = flat;
        if (needs_local) {
          Vec3 dir = cam.right * ((px + 0.5 - cxy) / cam.focal) +
                     cam.up * ((cxy - py - 0.5) / cam.focal) + cam.fwd;
          double denom = dot(dir, s.normal);
          if (std::abs(denom) > 1e-12) {
            double t = dot(plane_pt - cam.eye, s.normal) / denom;
            Vec3 hit = cam.eye + dir * t;
            double u = dot(hit - s.origin, s.axis_u);
            double v = hit.z;
            float f = pattern_factor(s.pattern, u, v, s.pattern_width);
            col = {shade_px(shaded_base.r * f), shade_px(shaded_base.g * f),
                   shade_px(shaded_base.b * f)};
          }
        }
        plane_r[idx] = col.r;
        plane_g[idx] = col.g;
        plane_b[idx] = col.b;
        r.mask[idx] = static_cast<uint8_t>(s.tag);
      }
    }
  }
}

RenderOutput render_scene(const AgentPose& pose, const std::vector<const ObjectInstance*>& objects,
                          const std::vector<double>& phases, const std::vector<int>& tags,
                          const WorldConfig& wcfg, const RenderConfig& rcfg) {
  Camera cam = make_camera(pose, rcfg);
  Vec3 light = normalize({rcfg.light_dir[0], rcfg.light_dir[1], rcfg.light_dir[2]});

  std::vector<Surface> room;
  add_room_surfaces(room, wcfg, rcfg);

  Raster r;
  r.side = rcfg.side;
  r.frame = Tensor({3, rcfg.side, rcfg.side});
  r.mask.assign(static_cast<size_t>(rcfg.side) * rcfg.side, 0);

  for (const Surface& s : room) fill_surface(r, cam, s, rcfg, light);

  // Painter's algorithm: farther object first, then its faces back to front.
  std::vector<size_t> order(objects.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto obj_depth = [&](size_t i) {
    CamPoint p = to_camera(cam, {objects[i]->x, objects[i]->y, 0.0});
    return p.z;
  };
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return obj_depth(a) > obj_depth(b); });

  for (size_t oi : order) {
    std::vector<Surface> faces;
    add_object_surfaces(faces, *objects[oi], phases[oi], tags[oi], rcfg);
    for (Surface& s : faces) {
      double acc = 0;
      for (const Vec3& p : s.pts) acc += to_camera(cam, p).z;
      s.sort_depth = acc / static_cast<double>(s.pts.size());
    }
    std::sort(faces.begin(), faces.end(),
              [](const Surface& a, const Surface& b) { return a.sort_depth > b.sort_depth; });
    for (const Surface& s : faces) fill_surface(r, cam, s, rcfg, light);
  }
  return {std::move(r.frame), std::move(r.mask)};
}

}  // namespace

float pattern_factor(Pattern pattern, double u, double v, double width) {
  switch (pattern) {
    case Pattern::None:
      return 1.0f;
    case Pattern::Pinstriped: {
      double band = 0.08 * width;
      long long k = static_cast<long long>(std::floor(u / band));
      return (k % 2 + 2) % 2 == 0 ? 1.0f : 0.35f;
    }
    case Pattern::Dotted: {
      double pitch = 0.16 * width;
      double cu = u - (std::floor(u / pitch) + 0.5) * pitch;
      double cv = v - (std::floor(v / pitch) + 0.5) * pitch;
      double rr = 0.30 * pitch;
      return cu * cu + cv * cv <= rr * rr ? 0.35f : 1.0f;
    }
  }
  return 1.0f;
}

AlbedoFn apply_pattern(AlbedoFn base, Pattern pattern, double silhouette_width) {
  return [base = std::move(base), pattern, silhouette_width](double u, double v) {
    Rgb c = base(u, v);
    float f = pattern_factor(pattern, u, v, silhouette_width);
    return Rgb{c.r * f, c.g * f, c.b * f};
  };
}

Rgb apply_shade(const Rgb& albedo, float factor) {
  auto clamp01 = [](float x) { return std::clamp(x, 0.0f, 1.0f); };
  return {clamp01(albedo.r * factor), clamp01(albedo.g * factor), clamp01(albedo.b * factor)};
}

RenderOutput render_full(const WorldState& state, const WorldConfig& wcfg,
                         const RenderConfig& rcfg) {
  std::vector<const ObjectInstance*> objs = {&state.spec.target, &state.spec.confounder};
  std::vector<double> phases = {state.target_phase, state.confounder_phase};
  std::vector<int> tags = {1, 2};
  return render_scene(state.pose, objs, phases, tags, wcfg, rcfg);
}

Tensor render(const WorldState& state, const WorldConfig& wcfg, const RenderConfig& rcfg) {
  return render_full(state, wcfg, rcfg).frame;
}

Tensor render_object_view(int shape_id, double yaw, const Rgb& colour, Pattern pattern,
                          float shade, double distance, const RenderConfig& rcfg) {
  WorldConfig wcfg;
  ObjectInstance obj;
  obj.shape_id = shape_id;
  obj.base_colour = colour;
  obj.pattern = pattern;
  obj.shade_factor = shade;
  obj.x = wcfg.room_w / 2;
  obj.y = 1.5;
  AgentPose pose;
  pose.x = obj.x;
  pose.y = obj.y + distance;
  pose.heading = -std::numbers::pi / 2;
  std::vector<const ObjectInstance*> objs = {&obj};
  return render_scene(pose, objs, {yaw}, {1}, wcfg, rcfg).frame;
}

void write_ppm(const std::string& path, const Tensor& frame) {
  if (frame.rank() != 3 || frame.dim(0) != 3)
    throw std::invalid_argument("write_ppm: expected 3xHxW frame, got " + frame.shape_str());
  const int h = frame.dim(1), w = frame.dim(2);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_ppm: cannot open " + path);
  os << "P6\n" << w << " " << h << "\n255\n";
  const float* pr = frame.ptr();
  const float* pg = pr + h * w;
  const float* pb = pg + h * w;
  for (int i = 0; i < h * w; ++i) {
    unsigned char px[3] = {static_cast<unsigned char>(std::lround(255.0f * pr[i])),
                           static_cast<unsigned char>(std::lround(255.0f * pg[i])),
                           static_cast<unsigned char>(std::lround(255.0f * pb[i]))};
    os.write(reinterpret_cast<const char*>(px), 3);
  }
}

}  // namespace gwla
