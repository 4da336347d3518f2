#pragma once

#include <cstdint>
#include <vector>

#include "evodepth/events.hpp"

namespace evd {

// Metric depth raster; 0 marks an invalid (no-return) pixel.
struct DepthFrame {
  Geometry geom;
  std::uint64_t t = 0;  // capture/prediction timestamp, microseconds
  std::vector<float> values;  // row-major h*w, meters

  DepthFrame() = default;
  DepthFrame(Geometry g, std::uint64_t ts)
      : geom(g), t(ts), values(g.pixels(), 0.0f) {}

  float& at(std::uint16_t x, std::uint16_t y) {
    return values[std::size_t(y) * geom.w + x];
  }
  float at(std::uint16_t x, std::uint16_t y) const {
    return values[std::size_t(y) * geom.w + x];
  }
};

}  // namespace evd
