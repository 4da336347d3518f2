#include <benchmark/benchmark.h>

#include "evodepth/dataset.hpp"
#include "evodepth/keyframe.hpp"
#include "evodepth/pipeline.hpp"
#include "evodepth/preprocess.hpp"
#include "evodepth/scene.hpp"

namespace {

using namespace evd;

const Sequence& desk_sequence() {
  static const Sequence seq = [] {
    SceneConfig sc;
    sc.duration_s = 2.0;
    return generate_sequence(make_desk_scene(1, sc));
  }();
  return seq;
}

void bm_slice_events(benchmark::State& state) {
  const auto& seq = desk_sequence();
  std::uint64_t t0 = 0;
  for (auto _ : state) {
    auto slice = slice_events(seq.events.events(), t0, t0 + 20000);
    benchmark::DoNotOptimize(slice);
    t0 = (t0 + 20000) % 1980000;
  }
}
BENCHMARK(bm_slice_events);

void bm_event_frame(benchmark::State& state) {
  const auto& seq = desk_sequence();
  const Geometry geom{seq.scene.config.h, seq.scene.config.w};
  const auto slice = slice_events(seq.events.events(), 0, 100000);
  for (auto _ : state) {
    auto frame = build_event_frame(slice, geom);
    benchmark::DoNotOptimize(frame);
  }
}
BENCHMARK(bm_event_frame);

void bm_voxel_grid(benchmark::State& state) {
  const auto& seq = desk_sequence();
  const Geometry geom{seq.scene.config.h, seq.scene.config.w};
  const auto slice = slice_events(seq.events.events(), 0, 100000);
  for (auto _ : state) {
    auto voxel = build_voxel_grid(slice, int(state.range(0)), geom);
    benchmark::DoNotOptimize(voxel);
  }
}
BENCHMARK(bm_voxel_grid)->Arg(1)->Arg(5)->Arg(10);

void bm_conv2d(benchmark::State& state) {
  const int c = int(state.range(0));
  Rng rng(3);
  Tensor<float> x(1, c, 64, 64), w(c, c, 3, 3), b(1, c, 1, 1);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = float(rng.uniform(-1, 1));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = float(rng.uniform(-1, 1));
  auto xv = nn::constant(x), wv = nn::constant(w), bv = nn::constant(b);
  for (auto _ : state) {
    auto y = nn::conv2d(xv, wv, bv, 1, 1);
    benchmark::DoNotOptimize(y->value);
  }
}
BENCHMARK(bm_conv2d)->Arg(8)->Arg(16)->Arg(32);

void bm_detector_predict(benchmark::State& state) {
  const auto& seq = desk_sequence();
  const Geometry geom{seq.scene.config.h, seq.scene.config.w};
  Detector model(geom, 5);
  const auto slice = slice_events(seq.events.events(), 0, 20000);
  const EventFrame frame = build_event_frame(slice, geom);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.predict(frame));
  }
}
BENCHMARK(bm_detector_predict);

void bm_extrapolator_forward(benchmark::State& state) {
  const auto& seq = desk_sequence();
  ExtrapolatorConfig cfg;
  cfg.geom = Geometry{seq.scene.config.h, seq.scene.config.w};
  Extrapolator model(cfg, 5);
  const auto slice = slice_events(seq.events.events(), 0, 100000);
  const auto voxel = build_voxel_grid(slice, cfg.bins, cfg.geom);
  for (auto _ : state) {
    auto pred = model.extrapolate(seq.depth.front(), voxel, 100000);
    benchmark::DoNotOptimize(pred);
  }
}
BENCHMARK(bm_extrapolator_forward);

void bm_pipeline_run(benchmark::State& state) {
  const auto& seq = desk_sequence();
  PipelineConfig cfg;
  cfg.lidar_rate_hz = 5.0;
  for (auto _ : state) {
    RuleOracleClassifier classifier(seq, KeyframeRuleConfig{});
    RepeatPredictor predictor;
    auto report = run_adaptive(seq, cfg, classifier, predictor);
    benchmark::DoNotOptimize(report);
  }
}
BENCHMARK(bm_pipeline_run);

}  // namespace

BENCHMARK_MAIN();
