#include "evodepth/keyframe.hpp"

#include <algorithm>
#include <cmath>

#include "evodepth/checkpoint.hpp"
#include "evodepth/init.hpp"
#include "evodepth/losses.hpp"

namespace evd {

using nn::Var;

Detector::Detector(Geometry geom, std::uint64_t seed) : geom_(geom) {
  Rng rng(seed);
  w1_ = nn::parameter(nn::kaiming_uniform<float>(16, 1, 3, 3, rng), "conv1.w");
  b1_ = nn::parameter(nn::zero_bias<float>(16), "conv1.b");
  w2_ = nn::parameter(nn::kaiming_uniform<float>(32, 16, 3, 3, rng), "conv2.w");
  b2_ = nn::parameter(nn::zero_bias<float>(32), "conv2.b");
  w3_ = nn::parameter(nn::kaiming_uniform<float>(64, 32, 3, 3, rng), "conv3.w");
  b3_ = nn::parameter(nn::zero_bias<float>(64), "conv3.b");
  wf_ = nn::parameter(nn::kaiming_uniform<float>(1, 64, 1, 1, rng), "head.w");
  bf_ = nn::parameter(nn::zero_bias<float>(1), "head.b");
}

Var<float> Detector::forward(const Var<float>& input) const {
  const auto& v = input->value;
  if (v.c() != 1 || v.h() != geom_.h || v.w() != geom_.w) {
    throw ConfigError("detector expects (N,1," + std::to_string(geom_.h) +
                      "," + std::to_string(geom_.w) + "), got " +
                      v.shape_str());
  }
  auto h1 = nn::relu(nn::conv2d(input, w1_, b1_, 2, 1));
  auto h2 = nn::relu(nn::conv2d(h1, w2_, b2_, 2, 1));
  auto h3 = nn::relu(nn::conv2d(h2, w3_, b3_, 2, 1));
  auto pooled = nn::global_avg_pool(h3);
  return nn::sigmoid(nn::conv2d(pooled, wf_, bf_, 1, 0));
}

float Detector::predict(const EventFrame& frame) const {
  if (!(frame.geom == geom_)) {
    throw ConfigError("event frame geometry does not match detector");
  }
  auto prob = forward(nn::constant(event_frame_to_tensor(frame)));
  return prob->value[0];
}

std::vector<Var<float>> Detector::params() const {
  return {w1_, b1_, w2_, b2_, w3_, b3_, wf_, bf_};
}

void Detector::save(const std::filesystem::path& path) const {
  nn::save_checkpoint(params(), path);
}

void Detector::load(const std::filesystem::path& path) {
  nn::load_checkpoint(params(), path);
}

namespace {

Tensor<float> stack_frames(const std::vector<DetectorSample>& samples,
                           const std::vector<std::size_t>& idx,
                           std::size_t lo, std::size_t hi) {
  const auto& first = samples[idx[lo]].frame;
  Tensor<float> batch(int(hi - lo), 1, first.h(), first.w());
  for (std::size_t i = lo; i < hi; ++i) {
    const auto& f = samples[idx[i]].frame;
    std::copy(f.data(), f.data() + f.size(),
              batch.data() + (i - lo) * f.size());
  }
  return batch;
}

double f1_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  const double p = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
  const double r = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
  return p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
}

}  // namespace

std::vector<TrainEpochLog> train_detector(
    Detector& model, const std::vector<DetectorSample>& train,
    const std::vector<DetectorSample>& val, const DetectorTrainConfig& cfg) {
  if (train.empty()) throw DataError("empty detector training set");
  std::size_t n_pos = 0;
  for (const auto& s : train) n_pos += s.label ? 1 : 0;
  const std::size_t n_neg = train.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw DataError("detector training set contains a single class");
  }
  const float w_pos = float(train.size()) / float(2 * n_pos);
  const float w_neg = float(train.size()) / float(2 * n_neg);

  auto params = model.params();
  nn::Nadam<float> opt(params, cfg.lr);
  Rng rng(cfg.seed);

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<TrainEpochLog> log;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size) {
      const std::size_t hi =
          std::min(order.size(), lo + std::size_t(cfg.batch_size));
      auto input = nn::constant(stack_frames(train, order, lo, hi));
      Tensor<float> labels(int(hi - lo), 1, 1, 1);
      Tensor<float> weights(int(hi - lo), 1, 1, 1);
      for (std::size_t i = lo; i < hi; ++i) {
        labels[i - lo] = train[order[i]].label ? 1.0f : 0.0f;
        weights[i - lo] = train[order[i]].label ? w_pos : w_neg;
      }
      auto loss = nn::bce_loss(model.forward(input), labels, weights);
      opt.zero_grad();
      nn::backward(loss);
      opt.step();
      loss_sum += loss->value[0];
      ++batches;
    }

    TrainEpochLog entry;
    entry.epoch = epoch;
    entry.lr = cfg.lr;
    entry.train_loss = loss_sum / double(batches);
    if (!val.empty()) {
      entry.val_metric = eval_detector(model, val).f1;
    }
    log.push_back(entry);
    if (!val.empty() && entry.val_metric >= cfg.stop_at_val_f1) break;
  }
  return log;
}

DetectorEval eval_detector(const Detector& model,
                           const std::vector<DetectorSample>& samples,
                           std::uint64_t lidar_period_us) {
  DetectorEval ev;
  std::vector<std::uint64_t> tp_times;
  std::vector<std::uint64_t> fp_times;
  for (const auto& s : samples) {
    auto prob = model.forward(nn::constant(s.frame));
    const bool pred = prob->value[0] > 0.5f;
    if (pred && s.label) {
      ++ev.tp;
      tp_times.push_back(s.t);
    } else if (pred && !s.label) {
      ++ev.fp;
      fp_times.push_back(s.t);
    } else if (!pred && s.label) {
      ++ev.fn;
    } else {
      ++ev.tn;
    }
  }
  ev.precision = ev.tp + ev.fp > 0 ? double(ev.tp) / double(ev.tp + ev.fp) : 0;
  ev.recall = ev.tp + ev.fn > 0 ? double(ev.tp) / double(ev.tp + ev.fn) : 0;
  ev.f1 = f1_from_counts(ev.tp, ev.fp, ev.fn);

  // gap to the nearest true positive or the next base-rate LiDAR frame
  for (std::uint64_t t : fp_times) {
    double gap_us = double(lidar_period_us - t % lidar_period_us);
    for (std::uint64_t tt : tp_times) {
      const double d = t > tt ? double(t - tt) : double(tt - t);
      gap_us = std::min(gap_us, d);
    }
    ev.fp_gap_ms.push_back(gap_us * 1e-3);
  }
  return ev;
}

}  // namespace evd
