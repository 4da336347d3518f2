#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "evodepth/depth.hpp"
#include "evodepth/event_io.hpp"
#include "evodepth/rng.hpp"

namespace evd {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const;
  Vec3 normalized() const;
};

// Camera looks along +z, x right, y down (image convention).
struct SceneConfig {
  std::uint16_t h = 64;
  std::uint16_t w = 64;
  double focal_px = 64.0;
  double cx = 32.0;
  double cy = 32.0;
  double rate_hz = 100.0;   // ground-truth depth rate
  double duration_s = 10.0;
  double contrast_c = 0.2;  // log-intensity threshold per event
  double max_range_m = 200.0;
  double ambient = 0.05;    // intensity floor, keeps log defined
  double noise_rate_hz = 0.0;  // optional uniform noise events per pixel
  Vec3 light_dir{0, 0, -1};    // direction toward the light
  std::uint64_t seed = 0;

  void validate() const;
  std::uint64_t frame_period_us() const;
  std::size_t frame_count() const;
};

// Position as a piecewise-linear function of time (seconds).
class PiecewiseLinearPath {
 public:
  PiecewiseLinearPath() = default;
  PiecewiseLinearPath(std::vector<std::pair<double, Vec3>> keys);

  static PiecewiseLinearPath constant(Vec3 p);
  static PiecewiseLinearPath linear(Vec3 from, Vec3 to, double t0, double t1);

  Vec3 at(double t_s) const;
  Vec3 velocity(double t_s) const;  // piecewise-constant derivative

  const std::vector<std::pair<double, Vec3>>& keys() const { return keys_; }

 private:
  std::vector<std::pair<double, Vec3>> keys_;
};

struct Primitive {
  enum class Kind { Sphere, Box };
  Kind kind = Kind::Sphere;
  PiecewiseLinearPath path;  // center position over time
  Vec3 half_extents{0.5, 0.5, 0.5};  // boxes; spheres use radius
  double radius = 0.5;
  double albedo = 0.8;
};

struct Scene {
  SceneConfig config;
  std::vector<Primitive> primitives;
  PiecewiseLinearPath ego;   // camera position over time
  bool has_ground = true;
  double ground_y = 1.0;     // plane y = ground_y (y grows downward)
  double ground_albedo = 0.5;
  double ground_checker_m = 0.0;  // checker tile size; 0 = untextured
  double ground_albedo2 = 0.5;    // second checker color
};

struct PrimitiveState {
  double distance_m = 0.0;  // shortest distance from camera to surface
  bool visible = false;     // occupies at least one rendered pixel
};

struct SceneState {
  std::uint64_t t = 0;
  double ego_speed = 0.0;  // m/s
  std::vector<PrimitiveState> primitives;
};

struct Sequence {
  Scene scene;
  std::vector<DepthFrame> depth;   // at config.rate_hz
  EventStream events{Geometry{}, {}};
  std::vector<SceneState> states;  // aligned with depth frames
};

// Per-pixel nearest-hit id: -1 none, -2 ground plane, >=0 primitive index.
struct RenderResult {
  DepthFrame depth;
  std::vector<float> intensity;     // row-major, in [ambient, 1]
  std::vector<std::int16_t> hit_id;
};

RenderResult render_scene(const Scene& scene, std::uint64_t t_us);
DepthFrame render_depth(const Scene& scene, std::uint64_t t_us);
std::vector<float> render_intensity(const Scene& scene, std::uint64_t t_us);

// Contrast-threshold event model over consecutive intensity samples.
// intensity[k] is the raster at t_us[k]; emits floor(|dL|/C) events per
// pixel per interval with linearly interpolated timestamps.
EventStream synthesize_events(const SceneConfig& config,
                              const std::vector<std::vector<float>>& intensity,
                              const std::vector<std::uint64_t>& t_us);

Sequence generate_sequence(const Scene& scene);

SceneState scene_state_at(const Scene& scene, std::uint64_t t_us);
SceneState scene_state_at(const Sequence& seq, std::uint64_t t_us);

}  // namespace evd
