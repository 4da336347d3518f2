#pragma once

#include <cstdint>
#include <vector>

#include "evodepth/depth.hpp"

namespace evd {

// Standard depth metric suite over the jointly valid pixel mask.
// Carries the pooled sums so aggregation over frames equals a single-pass
// computation over the concatenated pixels.
struct DepthMetrics {
  double rmse = 0.0;
  double log_rmse = 0.0;
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  std::uint64_t valid_px = 0;

  // pooled accumulators
  double se_sum = 0.0;
  double log_se_sum = 0.0;
  double abs_rel_sum = 0.0;
  double sq_rel_sum = 0.0;
  std::uint64_t d1_count = 0;
  std::uint64_t d2_count = 0;
  std::uint64_t d3_count = 0;
};

// Predictions below 1e-3 m are floored before log and ratio terms.
constexpr double kPredFloor = 1e-3;

DepthMetrics evaluate_depth(const DepthFrame& pred, const DepthFrame& target);

DepthMetrics aggregate(const std::vector<DepthMetrics>& frames);

}  // namespace evd
