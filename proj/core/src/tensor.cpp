#include "evodepth/preprocess.hpp"

#include <algorithm>

namespace evd {

Tensor<float> event_frame_to_tensor(const EventFrame& frame) {
  Tensor<float> t(1, 1, frame.geom.h, frame.geom.w);
  for (std::size_t i = 0; i < frame.values.size(); ++i) {
    const float v = std::clamp(float(frame.values[i]), -kEventClip, kEventClip);
    t[i] = v / kEventClip;
  }
  return t;
}

Tensor<float> voxel_to_tensor(const EventVoxelGrid& grid) {
  Tensor<float> t(1, grid.bins, grid.geom.h, grid.geom.w);
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    const float v = std::clamp(float(grid.values[i]), -kEventClip, kEventClip);
    t[i] = v / kEventClip;
  }
  return t;
}

Tensor<float> depth_to_tensor(const DepthFrame& frame, float max_range) {
  Tensor<float> t(1, 1, frame.geom.h, frame.geom.w);
  for (std::size_t i = 0; i < frame.values.size(); ++i) {
    t[i] = frame.values[i] / max_range;
  }
  return t;
}

DepthFrame tensor_to_depth(const Tensor<float>& t, int batch, float max_range,
                           std::uint64_t timestamp) {
  DepthFrame frame(Geometry{std::uint16_t(t.h()), std::uint16_t(t.w())},
                   timestamp);
  for (int y = 0; y < t.h(); ++y)
    for (int x = 0; x < t.w(); ++x)
      frame.at(std::uint16_t(x), std::uint16_t(y)) =
          t(batch, 0, y, x) * max_range;
  return frame;
}

Tensor<float> validity_mask(const DepthFrame& frame) {
  Tensor<float> t(1, 1, frame.geom.h, frame.geom.w);
  for (std::size_t i = 0; i < frame.values.size(); ++i) {
    t[i] = frame.values[i] > 0.0f ? 1.0f : 0.0f;
  }
  return t;
}

}  // namespace evd
