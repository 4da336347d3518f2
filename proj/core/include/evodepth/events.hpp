#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evodepth/errors.hpp"

namespace evd {

struct Geometry {
  std::uint16_t h = 0;
  std::uint16_t w = 0;

  std::size_t pixels() const { return std::size_t(h) * w; }
  bool operator==(const Geometry&) const = default;
};

// One asynchronous polarity change. Timestamps are integer microseconds;
// polarity is strictly -1 or +1.
struct Event {
  std::uint64_t t = 0;
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::int8_t p = 1;

  bool operator==(const Event&) const = default;
};

// Time-ordered event sequence with a declared sensor geometry.
// Immutable after construction; construction validates ordering, bounds,
// and polarity.
class EventStream {
 public:
  EventStream(Geometry geom, std::vector<Event> events);

  const Geometry& geometry() const { return geom_; }
  std::span<const Event> events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  bool operator==(const EventStream&) const = default;

 private:
  Geometry geom_;
  std::vector<Event> events_;
};

// Contiguous half-open view [t_start, t_end) into a stream.
struct EventSlice {
  std::uint64_t t_start = 0;
  std::uint64_t t_end = 0;
  std::span<const Event> events;

  std::uint64_t duration() const { return t_end - t_start; }
};

// Signed per-pixel polarity sums over one slice.
struct EventFrame {
  Geometry geom;
  std::vector<std::int32_t> values;  // row-major h*w

  std::int32_t& at(std::uint16_t x, std::uint16_t y) {
    return values[std::size_t(y) * geom.w + x];
  }
  std::int32_t at(std::uint16_t x, std::uint16_t y) const {
    return values[std::size_t(y) * geom.w + x];
  }
};

// B temporal bins of per-pixel polarity sums; bin sums reproduce the
// event frame of the same slice exactly.
struct EventVoxelGrid {
  int bins = 0;
  Geometry geom;
  std::vector<std::int32_t> values;  // bin-major b*h*w

  std::int32_t& at(int b, std::uint16_t x, std::uint16_t y) {
    return values[(std::size_t(b) * geom.h + y) * geom.w + x];
  }
  std::int32_t at(int b, std::uint16_t x, std::uint16_t y) const {
    return values[(std::size_t(b) * geom.h + y) * geom.w + x];
  }
};

// Binary-search slice extraction; throws ConfigError on an empty interval.
EventSlice slice_stream(const EventStream& stream, std::uint64_t t_start,
                        std::uint64_t t_end);

// Re-slice an existing slice (used by the pipeline for sub-windows).
EventSlice slice_events(std::span<const Event> events, std::uint64_t t_start,
                        std::uint64_t t_end);

EventFrame build_event_frame(const EventSlice& slice, Geometry geom);

EventVoxelGrid build_voxel_grid(const EventSlice& slice, int bins,
                                Geometry geom);

// Consecutive non-overlapping half-open windows of width delta_us covering
// the stream span. Every event lands in exactly one window.
class WindowIterator {
 public:
  WindowIterator(const EventStream& stream, std::uint64_t delta_us);

  std::optional<EventSlice> next();
  std::size_t window_count() const { return count_; }

 private:
  const EventStream* stream_;
  std::uint64_t delta_;
  std::uint64_t t0_ = 0;
  std::size_t count_ = 0;
  std::size_t index_ = 0;
  std::size_t cursor_ = 0;  // first event not yet emitted
};

}  // namespace evd
