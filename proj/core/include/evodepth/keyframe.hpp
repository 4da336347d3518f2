#pragma once

#include <filesystem>

#include "evodepth/events.hpp"
#include "evodepth/nn_ops.hpp"
#include "evodepth/preprocess.hpp"
#include "evodepth/scene.hpp"
#include "evodepth/train_log.hpp"

namespace evd {

struct KeyframeRuleConfig {
  double speed_threshold_mps = 10.0;
  double distance_threshold_m = 8.0;
  bool new_object_rule = true;

  void validate() const;
};

enum class KeyframeRule : unsigned { Speed = 1, Proximity = 2, NewObject = 4 };

struct KeyframeLabel {
  std::uint64_t t = 0;
  bool keyframe = false;
  unsigned rules = 0;  // bitmask of KeyframeRule

  bool fired(KeyframeRule r) const { return rules & unsigned(r); }
};

// OR of the three trigger rules; the rule set records which fired.
KeyframeLabel label_keyframe(const SceneState& prev, const SceneState& now,
                             const KeyframeRuleConfig& rules);

// Three stride-2 conv blocks (16/32/64 channels), global average pool,
// dense head, sigmoid.
class Detector {
 public:
  Detector(Geometry geom, std::uint64_t seed);

  nn::Var<float> forward(const nn::Var<float>& input) const;
  float predict(const EventFrame& frame) const;

  Geometry geometry() const { return geom_; }
  std::vector<nn::Var<float>> params() const;

  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

 private:
  Geometry geom_;
  nn::Var<float> w1_, b1_, w2_, b2_, w3_, b3_, wf_, bf_;
};

struct DetectorSample {
  Tensor<float> frame;  // (1, 1, H, W), normalized
  bool label = false;
  unsigned rules = 0;
  std::uint64_t t = 0;
  int sequence = 0;
};

struct DetectorTrainConfig {
  int epochs = 20;
  int batch_size = 64;
  float lr = 1e-4f;
  std::uint64_t seed = 0;
  double stop_at_val_f1 = 2.0;  // >1 disables early stopping
};

struct DetectorEval {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::vector<double> fp_gap_ms;  // per false positive
};

// BCE with inverse-frequency class weights; rejects single-class data.
std::vector<TrainEpochLog> train_detector(
    Detector& model, const std::vector<DetectorSample>& train,
    const std::vector<DetectorSample>& val, const DetectorTrainConfig& cfg);

DetectorEval eval_detector(const Detector& model,
                           const std::vector<DetectorSample>& samples,
                           std::uint64_t lidar_period_us = 100000);

}  // namespace evd
