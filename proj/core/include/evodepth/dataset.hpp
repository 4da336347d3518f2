#pragma once

#include "evodepth/extrapolator.hpp"
#include "evodepth/keyframe.hpp"
#include "evodepth/scene.hpp"

namespace evd {

// Randomized small-scale scenario: ground plane, 1..6 moving primitives,
// piecewise ego speeds in [0, 15] m/s, some trajectories crossing the
// frustum boundary. Fully determined by the seed.
Scene make_desk_scene(std::uint64_t seed, SceneConfig base = {});

struct DetectorDatasetConfig {
  std::uint64_t window_us = 20000;
  KeyframeRuleConfig rules;
};

// One sample per detector window; labels from ground-truth scene state at
// the window boundaries.
std::vector<DetectorSample> build_detector_samples(
    const Sequence& seq, int sequence_id, const DetectorDatasetConfig& cfg);

struct ExtrapDatasetConfig {
  std::vector<double> fps_set{2, 5, 10, 20, 50};  // gap sampling pool
  int bins = 5;
  ExtrapVariant variant = ExtrapVariant::Full;
  int samples_per_sequence = 40;
  std::uint64_t seed = 0;
};

// Adaptive protocol: (prior, target) gaps drawn uniformly from fps_set,
// voxel over [t_prior, t_target), target validity as the loss mask.
std::vector<ExtrapSample> build_extrap_samples(const Sequence& seq,
                                               const ExtrapDatasetConfig& cfg);

// Single (prior, voxel, target) triple from explicit frame indices.
ExtrapSample make_extrap_sample(const Sequence& seq, std::size_t prior_idx,
                                std::size_t target_idx, int bins,
                                ExtrapVariant variant);

struct FramePair {
  std::size_t prior_idx = 0;
  std::size_t target_idx = 0;
};

// Fixed-rate protocol: priors on the fps grid, targets one period later.
std::vector<FramePair> fixed_fps_pairs(const Sequence& seq, double fps);

}  // namespace evd
