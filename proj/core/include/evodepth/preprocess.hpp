#pragma once

#include "evodepth/depth.hpp"
#include "evodepth/tensor.hpp"

namespace evd {

// Event counts are clipped to [-clip, clip] and divided by clip before
// entering either network, bounding activations across activity regimes.
constexpr float kEventClip = 10.0f;

// (1, 1, H, W) normalized event frame.
Tensor<float> event_frame_to_tensor(const EventFrame& frame);

// (1, B, H, W) normalized voxel grid.
Tensor<float> voxel_to_tensor(const EventVoxelGrid& grid);

// (1, 1, H, W) depth scaled by 1/max_range; invalid pixels stay 0.
Tensor<float> depth_to_tensor(const DepthFrame& frame, float max_range);

// Inverse of depth_to_tensor for network output (channel 0, batch n).
DepthFrame tensor_to_depth(const Tensor<float>& t, int batch, float max_range,
                           std::uint64_t timestamp);

// (1, 1, H, W) mask, 1 where depth is valid.
Tensor<float> validity_mask(const DepthFrame& frame);

}  // namespace evd
