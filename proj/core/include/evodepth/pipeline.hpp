#pragma once

#include <memory>
#include <span>

#include "evodepth/extrapolator.hpp"
#include "evodepth/keyframe.hpp"
#include "evodepth/scene.hpp"

namespace evd {

struct PipelineConfig {
  double lidar_rate_hz = 10.0;
  std::uint64_t window_us = 20000;
  int voxel_bins = 5;
  std::uint64_t max_trigger_window_us = 500000;  // force a trigger past this
  // Modeled inference occupancy in simulated time; triggers arriving while
  // the previous one is still in flight are coalesced. 0 = instantaneous.
  std::uint64_t sim_inference_latency_us = 0;

  void validate() const;
  std::uint64_t lidar_period_us() const;
};

// Stage-2 interface: classify one detector window.
class KeyframeClassifier {
 public:
  virtual ~KeyframeClassifier() = default;
  virtual float classify(const EventFrame& frame, std::uint64_t t_start,
                         std::uint64_t t_end) = 0;
};

class CnnClassifier : public KeyframeClassifier {
 public:
  explicit CnnClassifier(const Detector& model) : model_(&model) {}
  float classify(const EventFrame& frame, std::uint64_t, std::uint64_t) override {
    return model_->predict(frame);
  }

 private:
  const Detector* model_;
};

// Ground-truth rule oracle (simulation privilege).
class RuleOracleClassifier : public KeyframeClassifier {
 public:
  RuleOracleClassifier(const Sequence& seq, KeyframeRuleConfig rules)
      : seq_(&seq), rules_(rules) {}
  float classify(const EventFrame& frame, std::uint64_t t_start,
                 std::uint64_t t_end) override;

 private:
  const Sequence* seq_;
  KeyframeRuleConfig rules_;
};

// Stage-3 interface: produce a depth frame at the trigger time.
class DepthPredictor {
 public:
  virtual ~DepthPredictor() = default;
  virtual DepthFrame predict(const DepthFrame& prior,
                             const EventVoxelGrid& voxel, std::uint64_t t1) = 0;
};

class CnnPredictor : public DepthPredictor {
 public:
  explicit CnnPredictor(const Extrapolator& model) : model_(&model) {}
  DepthFrame predict(const DepthFrame& prior, const EventVoxelGrid& voxel,
                     std::uint64_t t1) override {
    return model_->extrapolate(prior, voxel, t1);
  }

 private:
  const Extrapolator* model_;
};

class RepeatPredictor : public DepthPredictor {
 public:
  DepthFrame predict(const DepthFrame& prior, const EventVoxelGrid&,
                     std::uint64_t t1) override;
};

// Returns the ground-truth frame at the trigger time (test harness).
class GroundTruthPredictor : public DepthPredictor {
 public:
  explicit GroundTruthPredictor(const Sequence& seq) : seq_(&seq) {}
  DepthFrame predict(const DepthFrame&, const EventVoxelGrid&,
                     std::uint64_t t1) override;

 private:
  const Sequence* seq_;
};

enum class FrameSource { Lidar, Extrapolated };

struct EmittedFrame {
  std::uint64_t t = 0;
  FrameSource source = FrameSource::Lidar;
  DepthFrame frame;
  std::uint64_t voxel_t_start = 0;  // extrapolated frames only
  // measured wall-clock stage latencies contributing to this frame
  double slicer_us = 0.0;
  double detector_us = 0.0;
  double extrap_us = 0.0;
};

struct WindowDecision {
  std::uint64_t t_start = 0;
  std::uint64_t t_end = 0;
  float score = 0.0f;
  bool triggered = false;
  bool coalesced = false;
  bool forced = false;
};

struct LatencyStats {
  double p50_us = 0.0;
  double p95_us = 0.0;
  double max_us = 0.0;
  std::size_t count = 0;
};

struct RateSummary {
  double mean_hz = 0.0;
  double min_hz = 0.0;
  double max_hz = 0.0;
};

struct PipelineReport {
  PipelineConfig config;
  std::vector<EmittedFrame> frames;
  std::vector<WindowDecision> windows;
  LatencyStats slicer, detector, extrapolator;
  RateSummary effective_rate;
  std::size_t trigger_count = 0;
  std::size_t coalesced_count = 0;
};

// (n-1) / span of the emitted timestamps, in Hz.
double effective_frame_rate(std::span<const std::uint64_t> timestamps_us);

// Overall mean plus min/max over 1 s windows.
RateSummary effective_rate_summary(std::span<const std::uint64_t> timestamps_us);

LatencyStats latency_stats(std::vector<double> samples_us);

struct BudgetResult {
  std::vector<bool> frame_ok;  // aligned with report.frames
  std::size_t violations = 0;
};

// Flags emitted frames whose summed stage latencies exceeded the
// inter-frame gap at the then-current rate.
BudgetResult latency_budget_check(const PipelineReport& report);

// The adaptive loop: LiDAR frames at the base rate, detector windows of
// width window_us in between, voxel construction and extrapolation on
// positive classifications. Slicer -> detector -> extrapolator run as
// concurrent workers over capacity-1 channels; scheduling decisions are
// made in simulated time and are deterministic.
PipelineReport run_adaptive(const Sequence& seq, const PipelineConfig& cfg,
                            KeyframeClassifier& classifier,
                            DepthPredictor& predictor);

}  // namespace evd
