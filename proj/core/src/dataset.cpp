#include "evodepth/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "evodepth/errors.hpp"

namespace evd {

Scene make_desk_scene(std::uint64_t seed, SceneConfig base) {
  base.seed = seed;
  Rng rng(seed ^ 0x6465736bULL);

  Scene scene;
  scene.config = base;
  // tilt the light so the ground is lit and its checker texture carries
  // ego-motion contrast into the event stream
  scene.config.light_dir =
      Vec3{0.3 + 0.2 * rng.uniform(), -0.8, -0.5 + 0.2 * rng.uniform()}
          .normalized();
  scene.has_ground = true;
  scene.ground_y = 1.0;
  scene.ground_albedo = 0.25 + 0.1 * rng.uniform();
  scene.ground_albedo2 = 0.65 + 0.2 * rng.uniform();
  scene.ground_checker_m = 1.5 + rng.uniform();

  const double dur = base.duration_s;

  // Forward ego motion with per-segment speeds straddling the 10 m/s rule
  // threshold so sequences mix keyframe and non-keyframe stretches
  const int nseg = 3 + int(rng.uniform() * 3.0);
  std::vector<std::pair<double, Vec3>> ego_keys;
  ego_keys.push_back({0.0, {0, 0, 0}});
  double z = 0.0;
  for (int i = 1; i <= nseg; ++i) {
    const double speed = 15.0 * rng.uniform();
    z += speed * dur / nseg;
    ego_keys.push_back({dur * i / nseg, {0, 0, z}});
  }
  scene.ego = PiecewiseLinearPath(std::move(ego_keys));
  const double z_travel = z;

  const int nprim = 1 + int(rng.uniform() * 6.0) % 6;
  for (int i = 0; i < nprim; ++i) {
    Primitive p;
    p.kind = rng.uniform() < 0.5 ? Primitive::Kind::Sphere
                                 : Primitive::Kind::Box;
    p.radius = 0.4 + 1.0 * rng.uniform();
    p.half_extents = {p.radius, p.radius, p.radius};
    p.albedo = 0.3 + 0.7 * rng.uniform();

    const double pz = 5.0 + rng.uniform() * (z_travel + 25.0);
    const double py = -0.2 + 1.0 * rng.uniform();
    const double kind = rng.uniform();
    if (kind < 0.4) {
      // frustum-crossing lateral sweep
      const double side = rng.uniform() < 0.5 ? 1.0 : -1.0;
      const double t0 = rng.uniform() * dur * 0.5;
      const double t1 = t0 + 1.0 + rng.uniform() * (dur - t0 - 1.0);
      p.path = PiecewiseLinearPath::linear({side * 12.0, py, pz},
                                           {-side * 12.0, py, pz}, t0, t1);
    } else if (kind < 0.7) {
      // slow drift in view
      const double x0 = -6.0 + 12.0 * rng.uniform();
      const double dx = -2.0 + 4.0 * rng.uniform();
      const double dz = -3.0 + 6.0 * rng.uniform();
      p.path = PiecewiseLinearPath::linear({x0, py, pz},
                                           {x0 + dx, py, pz + dz}, 0.0, dur);
    } else {
      p.path = PiecewiseLinearPath::constant(
          {-6.0 + 12.0 * rng.uniform(), py, pz});
    }
    scene.primitives.push_back(std::move(p));
  }
  return scene;
}

std::vector<DetectorSample> build_detector_samples(
    const Sequence& seq, int sequence_id, const DetectorDatasetConfig& cfg) {
  if (cfg.window_us == 0) throw ConfigError("detector window must be positive");
  if (seq.depth.empty()) throw DataError("sequence has no depth frames");
  const Geometry geom{seq.scene.config.h, seq.scene.config.w};
  const std::uint64_t duration = seq.depth.back().t;

  std::vector<DetectorSample> out;
  for (std::uint64_t t0 = 0; t0 + cfg.window_us <= duration;
       t0 += cfg.window_us) {
    const std::uint64_t t1 = t0 + cfg.window_us;
    EventSlice slice = slice_events(seq.events.events(), t0, t1);
    EventFrame frame = build_event_frame(slice, geom);

    const SceneState prev = scene_state_at(seq, t0);
    const SceneState now = scene_state_at(seq, t1);
    const KeyframeLabel label = label_keyframe(prev, now, cfg.rules);

    DetectorSample s;
    s.frame = event_frame_to_tensor(frame);
    s.label = label.keyframe;
    s.rules = label.rules;
    s.t = t1;
    s.sequence = sequence_id;
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::size_t frame_index_at(const Sequence& seq, std::uint64_t t) {
  const std::uint64_t period = seq.scene.config.frame_period_us();
  const std::size_t idx = std::size_t((t + period / 2) / period);
  return std::min(idx, seq.depth.size() - 1);
}

}  // namespace

ExtrapSample make_extrap_sample(const Sequence& seq, std::size_t prior_idx,
                                std::size_t target_idx, int bins,
                                ExtrapVariant variant) {
  if (prior_idx >= seq.depth.size() || target_idx >= seq.depth.size()) {
    throw DataError("extrapolation sample frame index out of range");
  }
  if (target_idx <= prior_idx) {
    throw DataError("extrapolation target must follow the prior frame");
  }
  const DepthFrame& prior = seq.depth[prior_idx];
  const DepthFrame& target = seq.depth[target_idx];
  const float range = float(seq.scene.config.max_range_m);

  EventSlice slice = slice_events(seq.events.events(), prior.t, target.t);
  EventVoxelGrid voxel = build_voxel_grid(slice, bins, prior.geom);

  ExtrapSample s;
  s.prior = depth_to_tensor(prior, range);
  s.voxel = prepare_voxel_input(voxel, variant);
  s.target = depth_to_tensor(target, range);
  s.mask = validity_mask(target);
  s.t_prior = prior.t;
  s.t_target = target.t;
  return s;
}

std::vector<ExtrapSample> build_extrap_samples(const Sequence& seq,
                                               const ExtrapDatasetConfig& cfg) {
  if (cfg.fps_set.empty()) throw ConfigError("fps set must be non-empty");
  for (double f : cfg.fps_set) {
    if (f <= 0) throw ConfigError("fps values must be positive");
  }
  if (seq.depth.size() < 2) {
    throw DataError("sequence too short for extrapolation samples");
  }
  Rng rng(cfg.seed ^ 0x65787472ULL);
  const std::uint64_t duration = seq.depth.back().t;

  std::vector<ExtrapSample> out;
  out.reserve(std::size_t(cfg.samples_per_sequence));
  int attempts = 0;
  while (int(out.size()) < cfg.samples_per_sequence &&
         attempts < cfg.samples_per_sequence * 20) {
    ++attempts;
    const double fps =
        cfg.fps_set[std::size_t(rng.uniform_u64(0, cfg.fps_set.size() - 1))];
    const std::uint64_t gap = std::uint64_t(std::llround(1e6 / fps));
    if (gap >= duration) continue;
    const std::uint64_t t_prior = rng.uniform_u64(0, duration - gap);
    const std::size_t pi = frame_index_at(seq, t_prior);
    const std::size_t ti = frame_index_at(seq, seq.depth[pi].t + gap);
    if (ti <= pi) continue;
    out.push_back(make_extrap_sample(seq, pi, ti, cfg.bins, cfg.variant));
  }
  if (out.empty()) throw DataError("no extrapolation samples produced");
  return out;
}

std::vector<FramePair> fixed_fps_pairs(const Sequence& seq, double fps) {
  if (fps <= 0) throw ConfigError("fps must be positive");
  if (seq.depth.size() < 2) {
    throw DataError("sequence too short for fixed-rate pairs");
  }
  const std::uint64_t gap = std::uint64_t(std::llround(1e6 / fps));
  const std::uint64_t duration = seq.depth.back().t;
  std::vector<FramePair> out;
  for (std::uint64_t t = 0; t + gap <= duration; t += gap) {
    const std::size_t pi = frame_index_at(seq, t);
    const std::size_t ti = frame_index_at(seq, t + gap);
    if (ti > pi) out.push_back({pi, ti});
  }
  return out;
}

}  // namespace evd
