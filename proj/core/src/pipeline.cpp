#include "evodepth/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <thread>

namespace evd {

void PipelineConfig::validate() const {
  if (lidar_rate_hz <= 0) throw ConfigError("base LiDAR rate must be positive");
  if (window_us == 0) throw ConfigError("detector window must be positive");
  if (voxel_bins < 1) throw ConfigError("voxel bins must be positive");
}

std::uint64_t PipelineConfig::lidar_period_us() const {
  return static_cast<std::uint64_t>(std::llround(1e6 / lidar_rate_hz));
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_us(Clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

// Single-slot blocking channel; FIFO order keeps the loop deterministic.
template <typename T>
class BoundedChannel {
 public:
  void push(T item) {
    std::unique_lock lock(m_);
    cv_space_.wait(lock, [&] { return !slot_.has_value(); });
    slot_ = std::move(item);
    cv_item_.notify_one();
  }

  std::optional<T> pop() {
    std::unique_lock lock(m_);
    cv_item_.wait(lock, [&] { return slot_.has_value() || closed_; });
    if (!slot_.has_value()) return std::nullopt;
    std::optional<T> out = std::move(slot_);
    slot_.reset();
    cv_space_.notify_one();
    return out;
  }

  void close() {
    std::lock_guard lock(m_);
    closed_ = true;
    cv_item_.notify_all();
  }

 private:
  std::mutex m_;
  std::condition_variable cv_item_, cv_space_;
  std::optional<T> slot_;
  bool closed_ = false;
};

struct SlicedWindow {
  EventFrame frame;
  std::uint64_t t_start = 0;
  std::uint64_t t_end = 0;
  double slicer_us = 0.0;
};

struct Decision {
  std::uint64_t t_start = 0;
  std::uint64_t t_end = 0;
  float score = 0.0f;
  double slicer_us = 0.0;
  double detector_us = 0.0;
};

const SceneState& nearest_state(const Sequence& seq, std::uint64_t t) {
  if (seq.states.empty()) throw DataError("sequence has no scene states");
  std::size_t best = 0;
  std::uint64_t best_d = UINT64_MAX;
  for (std::size_t i = 0; i < seq.states.size(); ++i) {
    const std::uint64_t d = seq.states[i].t > t ? seq.states[i].t - t
                                                : t - seq.states[i].t;
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return seq.states[best];
}

const DepthFrame& gt_frame_at(const Sequence& seq, std::uint64_t t) {
  if (seq.depth.empty()) throw DataError("sequence has no depth frames");
  std::size_t best = 0;
  std::uint64_t best_d = UINT64_MAX;
  for (std::size_t i = 0; i < seq.depth.size(); ++i) {
    const std::uint64_t d =
        seq.depth[i].t > t ? seq.depth[i].t - t : t - seq.depth[i].t;
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return seq.depth[best];
}

}  // namespace

float RuleOracleClassifier::classify(const EventFrame&, std::uint64_t t_start,
                                     std::uint64_t t_end) {
  const SceneState& prev = nearest_state(*seq_, t_start);
  const SceneState& now = nearest_state(*seq_, t_end);
  if (now.t <= prev.t) return 0.0f;
  return label_keyframe(prev, now, rules_).keyframe ? 1.0f : 0.0f;
}

DepthFrame RepeatPredictor::predict(const DepthFrame& prior,
                                    const EventVoxelGrid&, std::uint64_t t1) {
  DepthFrame out = prior;
  out.t = t1;
  return out;
}

DepthFrame GroundTruthPredictor::predict(const DepthFrame&,
                                         const EventVoxelGrid&,
                                         std::uint64_t t1) {
  DepthFrame out = gt_frame_at(*seq_, t1);
  out.t = t1;
  return out;
}

double effective_frame_rate(std::span<const std::uint64_t> timestamps_us) {
  if (timestamps_us.size() < 2) {
    throw DataError("effective frame rate needs at least two frames");
  }
  const double span_s =
      double(timestamps_us.back() - timestamps_us.front()) * 1e-6;
  if (span_s <= 0) throw DataError("emitted frames span zero time");
  return double(timestamps_us.size() - 1) / span_s;
}

RateSummary effective_rate_summary(
    std::span<const std::uint64_t> timestamps_us) {
  RateSummary s;
  s.mean_hz = effective_frame_rate(timestamps_us);
  const std::uint64_t t0 = timestamps_us.front();
  const std::uint64_t span = timestamps_us.back() - t0;
  if (span < 1000000) {
    s.min_hz = s.max_hz = s.mean_hz;
    return s;
  }
  const std::size_t n_windows = std::size_t(span / 1000000);
  s.min_hz = 1e300;
  s.max_hz = 0;
  for (std::size_t k = 0; k < n_windows; ++k) {
    const std::uint64_t lo = t0 + k * 1000000;
    const std::uint64_t hi = lo + 1000000;
    std::size_t count = 0;
    for (std::uint64_t t : timestamps_us) {
      if (t >= lo && t < hi) ++count;
    }
    s.min_hz = std::min(s.min_hz, double(count));
    s.max_hz = std::max(s.max_hz, double(count));
  }
  return s;
}

LatencyStats latency_stats(std::vector<double> samples_us) {
  LatencyStats st;
  st.count = samples_us.size();
  if (samples_us.empty()) return st;
  std::sort(samples_us.begin(), samples_us.end());
  st.p50_us = samples_us[samples_us.size() / 2];
  st.p95_us = samples_us[std::size_t(double(samples_us.size() - 1) * 0.95)];
  st.max_us = samples_us.back();
  return st;
}

BudgetResult latency_budget_check(const PipelineReport& report) {
  BudgetResult r;
  r.frame_ok.assign(report.frames.size(), true);
  for (std::size_t i = 1; i < report.frames.size(); ++i) {
    const auto& f = report.frames[i];
    const double budget_us = double(f.t - report.frames[i - 1].t);
    const double total = f.slicer_us + f.detector_us + f.extrap_us;
    if (total > budget_us) {
      r.frame_ok[i] = false;
      ++r.violations;
    }
  }
  return r;
}

PipelineReport run_adaptive(const Sequence& seq, const PipelineConfig& cfg,
                            KeyframeClassifier& classifier,
                            DepthPredictor& predictor) {
  cfg.validate();
  if (seq.depth.empty()) throw DataError("sequence has no depth frames");
  const Geometry geom = seq.depth.front().geom;
  if (!(geom == seq.events.geometry()) && !seq.events.empty()) {
    throw DataError("event and depth geometry mismatch");
  }
  const std::uint64_t duration = seq.depth.back().t;
  const std::uint64_t period = cfg.lidar_period_us();
  const std::size_t n_windows =
      duration == 0 ? 0 : std::size_t((duration - 1) / cfg.window_us) + 1;

  PipelineReport report;
  report.config = cfg;

  BoundedChannel<SlicedWindow> window_ch;
  BoundedChannel<Decision> decision_ch;

  std::thread slicer([&] {
    for (std::size_t k = 0; k < n_windows; ++k) {
      const std::uint64_t t_start = k * cfg.window_us;
      const std::uint64_t t_end = t_start + cfg.window_us;
      const auto t0 = Clock::now();
      EventSlice slice = slice_events(seq.events.events(), t_start, t_end);
      EventFrame frame = build_event_frame(slice, geom);
      const double us = elapsed_us(t0);
      window_ch.push(SlicedWindow{std::move(frame), t_start, t_end, us});
    }
    window_ch.close();
  });

  std::thread detector([&] {
    while (auto w = window_ch.pop()) {
      const auto t0 = Clock::now();
      const float score = classifier.classify(w->frame, w->t_start, w->t_end);
      const double us = elapsed_us(t0);
      decision_ch.push(Decision{w->t_start, w->t_end, score, w->slicer_us, us});
    }
    decision_ch.close();
  });

  // extrapolator stage (this thread)
  std::vector<double> slicer_samples, detector_samples, extrap_samples;
  std::uint64_t next_lidar = 0;
  std::uint64_t last_lidar_t = 0;
  const DepthFrame* last_lidar_frame = nullptr;
  std::uint64_t busy_until = 0;

  auto emit_lidar_due = [&](std::uint64_t up_to) {
    while (next_lidar <= up_to && next_lidar <= duration) {
      EmittedFrame f;
      f.t = next_lidar;
      f.source = FrameSource::Lidar;
      f.frame = gt_frame_at(seq, next_lidar);
      f.frame.t = next_lidar;
      report.frames.push_back(std::move(f));
      last_lidar_t = next_lidar;
      last_lidar_frame = &gt_frame_at(seq, next_lidar);
      next_lidar += period;
    }
  };

  emit_lidar_due(0);

  while (auto d = decision_ch.pop()) {
    slicer_samples.push_back(d->slicer_us);
    detector_samples.push_back(d->detector_us);

    // LiDAR frames due up to this window's end are emitted first and
    // reset the extrapolation anchor.
    emit_lidar_due(d->t_end);

    WindowDecision rec;
    rec.t_start = d->t_start;
    rec.t_end = d->t_end;
    rec.score = d->score;

    const bool positive = d->score > 0.5f;
    const bool at_lidar_instant = last_lidar_t == d->t_end;
    const bool forced =
        !at_lidar_instant &&
        d->t_end - last_lidar_t >= cfg.max_trigger_window_us;
    if ((positive || forced) && !at_lidar_instant && d->t_end <= duration &&
        d->t_end > last_lidar_t && last_lidar_frame != nullptr) {
      rec.forced = forced && !positive;
      if (d->t_end < busy_until) {
        rec.coalesced = true;
        ++report.coalesced_count;
      } else {
        const auto t0 = Clock::now();
        EventSlice vslice =
            slice_events(seq.events.events(), last_lidar_t, d->t_end);
        EventVoxelGrid voxel = build_voxel_grid(vslice, cfg.voxel_bins, geom);
        const double voxel_us = elapsed_us(t0);
        slicer_samples.push_back(voxel_us);

        const auto t1 = Clock::now();
        DepthFrame pred = predictor.predict(*last_lidar_frame, voxel, d->t_end);
        const double pred_us = elapsed_us(t1);
        extrap_samples.push_back(pred_us);

        EmittedFrame f;
        f.t = d->t_end;
        f.source = FrameSource::Extrapolated;
        f.frame = std::move(pred);
        f.frame.t = d->t_end;
        f.voxel_t_start = last_lidar_t;
        f.slicer_us = d->slicer_us + voxel_us;
        f.detector_us = d->detector_us;
        f.extrap_us = pred_us;
        report.frames.push_back(std::move(f));
        rec.triggered = true;
        ++report.trigger_count;
        busy_until = d->t_end + cfg.sim_inference_latency_us;
      }
    }
    report.windows.push_back(rec);
  }
  emit_lidar_due(duration);

  slicer.join();
  detector.join();

  report.slicer = latency_stats(std::move(slicer_samples));
  report.detector = latency_stats(std::move(detector_samples));
  report.extrapolator = latency_stats(std::move(extrap_samples));

  std::vector<std::uint64_t> ts;
  ts.reserve(report.frames.size());
  for (const auto& f : report.frames) ts.push_back(f.t);
  if (ts.size() >= 2) report.effective_rate = effective_rate_summary(ts);
  return report;
}

}  // namespace evd
