#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include "evodepth/scene.hpp"

namespace evd {

// ELDR record: magic "ELDR", u16 H, u16 W, u64 timestamp_us, f32 scale
// (meters per unit), then H*W f32 row-major. A depth sequence file is a
// plain concatenation of ELDR records in time order.
void write_depth_frame(const DepthFrame& frame, std::ostream& out,
                       float scale = 1.0f);
void write_depth_frame(const DepthFrame& frame,
                       const std::filesystem::path& path, float scale = 1.0f);
DepthFrame read_depth_frame(std::istream& in);
DepthFrame read_depth_frame(const std::filesystem::path& path);

void write_depth_sequence(const std::vector<DepthFrame>& frames,
                          const std::filesystem::path& path);
std::vector<DepthFrame> read_depth_sequence(const std::filesystem::path& path);

// On-disk sequence layout (one directory per sequence):
//   manifest.json  config, primitives, trajectories, file names
//   events.evt1    EVT1 stream
//   depth.eldr     concatenated ELDR records
//   states.json    per-frame scene state annotations
void write_sequence(const Sequence& seq, const std::filesystem::path& dir);
Sequence read_sequence(const std::filesystem::path& dir);

}  // namespace evd
