#pragma once

#include <span>

#include "evodepth/depth.hpp"

namespace evd {

// Re-emits the prior frame at the requested timestamp.
DepthFrame baseline_repeat(const DepthFrame& prior, std::uint64_t t1);

// Per-pixel least-squares line through the history frames (K >= 2,
// callers pass the last K), evaluated at t1. A pixel invalid in any
// history frame stays invalid.
DepthFrame baseline_linear(std::span<const DepthFrame> history,
                           std::uint64_t t1);

// Geometric growth fitted on the last two frames:
// d_hat = d_curr * (d_curr / d_prev)^(dt / dt_prev).
DepthFrame baseline_exponential(const DepthFrame& prev, const DepthFrame& curr,
                                std::uint64_t t1);

}  // namespace evd
