#include "evodepth/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace evd {

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

Vec3 Vec3::normalized() const {
  const double n = norm();
  return n > 0 ? Vec3{x / n, y / n, z / n} : Vec3{};
}

void SceneConfig::validate() const {
  if (rate_hz <= 0) throw ConfigError("ground-truth rate must be positive");
  if (contrast_c <= 0) throw ConfigError("contrast threshold must be positive");
  if (h < 8 || w < 8) throw ConfigError("geometry must be at least 8x8");
  if (duration_s <= 0) throw ConfigError("duration must be positive");
  if (max_range_m <= 0) throw ConfigError("max range must be positive");
  if (focal_px <= 0) throw ConfigError("focal length must be positive");
}

std::uint64_t SceneConfig::frame_period_us() const {
  return static_cast<std::uint64_t>(std::llround(1e6 / rate_hz));
}

std::size_t SceneConfig::frame_count() const {
  const std::uint64_t dur = static_cast<std::uint64_t>(
      std::llround(duration_s * 1e6));
  return std::size_t(dur / frame_period_us()) + 1;
}

PiecewiseLinearPath::PiecewiseLinearPath(
    std::vector<std::pair<double, Vec3>> keys)
    : keys_(std::move(keys)) {
  if (keys_.empty()) throw ConfigError("path needs at least one key");
  for (std::size_t i = 1; i < keys_.size(); ++i) {
    if (keys_[i].first <= keys_[i - 1].first) {
      throw ConfigError("path keys must be strictly increasing in time");
    }
  }
}

PiecewiseLinearPath PiecewiseLinearPath::constant(Vec3 p) {
  return PiecewiseLinearPath({{0.0, p}});
}

PiecewiseLinearPath PiecewiseLinearPath::linear(Vec3 from, Vec3 to, double t0,
                                                double t1) {
  return PiecewiseLinearPath({{t0, from}, {t1, to}});
}

Vec3 PiecewiseLinearPath::at(double t_s) const {
  if (keys_.size() == 1 || t_s <= keys_.front().first)
    return keys_.front().second;
  if (t_s >= keys_.back().first) return keys_.back().second;
  for (std::size_t i = 1; i < keys_.size(); ++i) {
    if (t_s <= keys_[i].first) {
      const auto& [ta, pa] = keys_[i - 1];
      const auto& [tb, pb] = keys_[i];
      const double a = (t_s - ta) / (tb - ta);
      return pa + (pb - pa) * a;
    }
  }
  return keys_.back().second;
}

Vec3 PiecewiseLinearPath::velocity(double t_s) const {
  if (keys_.size() == 1) return {};
  if (t_s < keys_.front().first || t_s > keys_.back().first) return {};
  for (std::size_t i = 1; i < keys_.size(); ++i) {
    if (t_s <= keys_[i].first) {
      const auto& [ta, pa] = keys_[i - 1];
      const auto& [tb, pb] = keys_[i];
      return (pb - pa) * (1.0 / (tb - ta));
    }
  }
  return {};
}

namespace {

struct Hit {
  double s = std::numeric_limits<double>::infinity();  // ray parameter = z-depth
  Vec3 normal{};
  double albedo = 0.0;
  std::int16_t id = -1;
};

// Ray p = origin + s*dir with dir.z == 1, so s is z-depth directly.
void intersect_sphere(const Vec3& origin, const Vec3& dir, const Vec3& c,
                      double r, double albedo, std::int16_t id, Hit& best) {
  const Vec3 oc = origin - c;
  const double a = dir.dot(dir);
  const double b = 2.0 * oc.dot(dir);
  const double cc = oc.dot(oc) - r * r;
  const double disc = b * b - 4 * a * cc;
  if (disc < 0) return;
  const double sq = std::sqrt(disc);
  double s = (-b - sq) / (2 * a);
  if (s < 1e-9) s = (-b + sq) / (2 * a);
  if (s < 1e-9 || s >= best.s) return;
  const Vec3 p = origin + dir * s;
  best = Hit{s, (p - c) * (1.0 / r), albedo, id};
}

void intersect_box(const Vec3& origin, const Vec3& dir, const Vec3& c,
                   const Vec3& he, double albedo, std::int16_t id, Hit& best) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int near_axis = -1;
  const double o[3] = {origin.x - c.x, origin.y - c.y, origin.z - c.z};
  const double d[3] = {dir.x, dir.y, dir.z};
  const double e[3] = {he.x, he.y, he.z};
  for (int ax = 0; ax < 3; ++ax) {
    if (std::abs(d[ax]) < 1e-12) {
      if (std::abs(o[ax]) > e[ax]) return;
      continue;
    }
    double t1 = (-e[ax] - o[ax]) / d[ax];
    double t2 = (e[ax] - o[ax]) / d[ax];
    if (t1 > t2) std::swap(t1, t2);
    if (t1 > t_near) {
      t_near = t1;
      near_axis = ax;
    }
    t_far = std::min(t_far, t2);
    if (t_near > t_far) return;
  }
  const double s = t_near;
  if (s < 1e-9 || s >= best.s || near_axis < 0) return;
  const double po[3] = {o[0] + d[0] * s, o[1] + d[1] * s, o[2] + d[2] * s};
  Vec3 n{};
  if (near_axis == 0) n.x = po[0] > 0 ? 1 : -1;
  if (near_axis == 1) n.y = po[1] > 0 ? 1 : -1;
  if (near_axis == 2) n.z = po[2] > 0 ? 1 : -1;
  best = Hit{s, n, albedo, id};
}

void intersect_ground(const Vec3& origin, const Vec3& dir, double gy,
                      double albedo, Hit& best) {
  if (std::abs(dir.y) < 1e-12) return;
  const double s = (gy - origin.y) / dir.y;
  if (s < 1e-9 || s >= best.s) return;
  best = Hit{s, Vec3{0, -1, 0}, albedo, -2};
}

double point_box_distance(const Vec3& p, const Vec3& c, const Vec3& he) {
  const double dx = std::max({c.x - he.x - p.x, 0.0, p.x - (c.x + he.x)});
  const double dy = std::max({c.y - he.y - p.y, 0.0, p.y - (c.y + he.y)});
  const double dz = std::max({c.z - he.z - p.z, 0.0, p.z - (c.z + he.z)});
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

RenderResult render_scene(const Scene& scene, std::uint64_t t_us) {
  const SceneConfig& cfg = scene.config;
  const double t_s = double(t_us) * 1e-6;
  const Vec3 cam = scene.ego.at(t_s);
  const Vec3 light = cfg.light_dir.normalized();

  RenderResult out;
  out.depth = DepthFrame(Geometry{cfg.h, cfg.w}, t_us);
  out.intensity.assign(out.depth.geom.pixels(), float(cfg.ambient));
  out.hit_id.assign(out.depth.geom.pixels(), -1);

  struct PrimPose {
    Vec3 center;
  };
  std::vector<PrimPose> poses(scene.primitives.size());
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    poses[i].center = scene.primitives[i].path.at(t_s);
  }

  for (std::uint16_t y = 0; y < cfg.h; ++y) {
    for (std::uint16_t x = 0; x < cfg.w; ++x) {
      const Vec3 dir{(x + 0.5 - cfg.cx) / cfg.focal_px,
                     (y + 0.5 - cfg.cy) / cfg.focal_px, 1.0};
      Hit best;
      for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
        const Primitive& pr = scene.primitives[i];
        if (pr.kind == Primitive::Kind::Sphere) {
          intersect_sphere(cam, dir, poses[i].center, pr.radius, pr.albedo,
                           std::int16_t(i), best);
        } else {
          intersect_box(cam, dir, poses[i].center, pr.half_extents, pr.albedo,
                        std::int16_t(i), best);
        }
      }
      if (scene.has_ground) {
        intersect_ground(cam, dir, scene.ground_y, scene.ground_albedo, best);
      }
      const std::size_t idx = std::size_t(y) * cfg.w + x;
      if (std::isfinite(best.s) && best.s <= cfg.max_range_m) {
        out.depth.values[idx] = float(best.s);
        out.hit_id[idx] = best.id;
        if (best.id == -2 && scene.ground_checker_m > 0) {
          const Vec3 p = cam + dir * best.s;
          const long long px_ = (long long)std::floor(p.x / scene.ground_checker_m);
          const long long pz_ = (long long)std::floor(p.z / scene.ground_checker_m);
          if ((px_ + pz_) & 1) best.albedo = scene.ground_albedo2;
        }
        const double shade =
            best.albedo * std::max(0.0, best.normal.dot(light));
        out.intensity[idx] =
            float(std::clamp(shade, cfg.ambient, 1.0));
      }
    }
  }
  return out;
}

DepthFrame render_depth(const Scene& scene, std::uint64_t t_us) {
  return render_scene(scene, t_us).depth;
}

std::vector<float> render_intensity(const Scene& scene, std::uint64_t t_us) {
  return render_scene(scene, t_us).intensity;
}

EventStream synthesize_events(const SceneConfig& config,
                              const std::vector<std::vector<float>>& intensity,
                              const std::vector<std::uint64_t>& t_us) {
  if (intensity.size() < 2) throw ConfigError("need at least two samples");
  if (intensity.size() != t_us.size()) {
    throw ConfigError("sample count mismatch");
  }
  const Geometry geom{config.h, config.w};
  const std::size_t px = geom.pixels();
  const double c = config.contrast_c;

  std::vector<double> ref(px);
  for (std::size_t i = 0; i < px; ++i) ref[i] = std::log(intensity[0][i]);

  std::vector<Event> events;
  for (std::size_t k = 1; k < intensity.size(); ++k) {
    const std::uint64_t ta = t_us[k - 1];
    const std::uint64_t tb = t_us[k];
    std::vector<Event> interval;
    for (std::size_t i = 0; i < px; ++i) {
      const double lk = std::log(intensity[k][i]);
      const double dl = lk - ref[i];
      const int n = int(std::floor(std::abs(dl) / c));
      if (n == 0) continue;
      const std::int8_t pol = dl > 0 ? 1 : -1;
      const std::uint16_t ex = std::uint16_t(i % geom.w);
      const std::uint16_t ey = std::uint16_t(i / geom.w);
      for (int j = 1; j <= n; ++j) {
        // crossing time of the j-th threshold under linear interpolation
        const double frac = (j * c) / std::abs(dl);
        const std::uint64_t et =
            ta + std::uint64_t(std::floor(double(tb - ta) * frac));
        interval.push_back(Event{std::min(et, tb - 1), ex, ey, pol});
      }
      ref[i] += n * c * pol;
    }
    std::sort(interval.begin(), interval.end(),
              [](const Event& a, const Event& b) {
                return std::tie(a.t, a.y, a.x) < std::tie(b.t, b.y, b.x);
              });
    events.insert(events.end(), interval.begin(), interval.end());
  }

  if (config.noise_rate_hz > 0) {
    Rng rng(config.seed ^ 0x6e6f697365ULL);
    const double span_s = double(t_us.back() - t_us.front()) * 1e-6;
    const std::size_t n_noise =
        std::size_t(config.noise_rate_hz * span_s * double(px));
    std::vector<Event> noise;
    noise.reserve(n_noise);
    for (std::size_t i = 0; i < n_noise; ++i) {
      Event e;
      e.t = rng.uniform_u64(t_us.front(), t_us.back());
      e.x = std::uint16_t(rng.uniform_int(0, geom.w - 1));
      e.y = std::uint16_t(rng.uniform_int(0, geom.h - 1));
      e.p = rng.uniform() < 0.5 ? std::int8_t(-1) : std::int8_t(1);
      noise.push_back(e);
    }
    events.insert(events.end(), noise.begin(), noise.end());
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
  }
  return EventStream(geom, std::move(events));
}

Sequence generate_sequence(const Scene& scene) {
  scene.config.validate();
  const SceneConfig& cfg = scene.config;
  const std::uint64_t period = cfg.frame_period_us();
  const std::size_t n = cfg.frame_count();

  Sequence seq;
  seq.scene = scene;
  seq.depth.reserve(n);
  seq.states.reserve(n);

  std::vector<std::vector<float>> intensity;
  std::vector<std::uint64_t> times;
  intensity.reserve(n);
  times.reserve(n);

  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t t = k * period;
    RenderResult r = render_scene(scene, t);

    SceneState st;
    st.t = t;
    st.ego_speed = scene.ego.velocity(double(t) * 1e-6).norm();
    st.primitives.resize(scene.primitives.size());
    const Vec3 cam = scene.ego.at(double(t) * 1e-6);
    for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
      const Primitive& pr = scene.primitives[i];
      const Vec3 c = pr.path.at(double(t) * 1e-6);
      double d;
      if (pr.kind == Primitive::Kind::Sphere) {
        d = std::max(0.0, (c - cam).norm() - pr.radius);
      } else {
        d = point_box_distance(cam, c, pr.half_extents);
      }
      st.primitives[i].distance_m = d;
      st.primitives[i].visible = false;
    }
    for (std::int16_t id : r.hit_id) {
      if (id >= 0) st.primitives[std::size_t(id)].visible = true;
    }

    seq.depth.push_back(std::move(r.depth));
    seq.states.push_back(std::move(st));
    intensity.push_back(std::move(r.intensity));
    times.push_back(t);
  }

  seq.events = synthesize_events(cfg, intensity, times);
  return seq;
}

SceneState scene_state_at(const Scene& scene, std::uint64_t t_us) {
  const std::uint64_t dur =
      static_cast<std::uint64_t>(std::llround(scene.config.duration_s * 1e6));
  if (t_us > dur) {
    throw ConfigError("time " + std::to_string(t_us) +
                      "us outside sequence duration");
  }
  RenderResult r = render_scene(scene, t_us);
  SceneState st;
  st.t = t_us;
  const double t_s = double(t_us) * 1e-6;
  st.ego_speed = scene.ego.velocity(t_s).norm();
  const Vec3 cam = scene.ego.at(t_s);
  st.primitives.resize(scene.primitives.size());
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    const Primitive& pr = scene.primitives[i];
    const Vec3 c = pr.path.at(t_s);
    if (pr.kind == Primitive::Kind::Sphere) {
      st.primitives[i].distance_m = std::max(0.0, (c - cam).norm() - pr.radius);
    } else {
      st.primitives[i].distance_m = point_box_distance(cam, c, pr.half_extents);
    }
  }
  for (std::int16_t id : r.hit_id) {
    if (id >= 0) st.primitives[std::size_t(id)].visible = true;
  }
  return st;
}

SceneState scene_state_at(const Sequence& seq, std::uint64_t t_us) {
  return scene_state_at(seq.scene, t_us);
}

}  // namespace evd
