#include "evodepth/events.hpp"

#include <algorithm>
#include <string>

namespace evd {

EventStream::EventStream(Geometry geom, std::vector<Event> events)
    : geom_(geom), events_(std::move(events)) {
  std::uint64_t prev = 0;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const Event& e = events_[i];
    if (e.p != -1 && e.p != 1) {
      throw DataError("event " + std::to_string(i) + " has polarity " +
                      std::to_string(int(e.p)) + ", expected -1 or +1");
    }
    if (e.x >= geom_.w || e.y >= geom_.h) {
      throw DataError("event " + std::to_string(i) + " at (" +
                      std::to_string(e.x) + "," + std::to_string(e.y) +
                      ") outside geometry " + std::to_string(geom_.w) + "x" +
                      std::to_string(geom_.h));
    }
    if (i > 0 && e.t < prev) {
      throw DataError("event " + std::to_string(i) +
                      " breaks timestamp ordering");
    }
    prev = e.t;
  }
}

EventSlice slice_events(std::span<const Event> events, std::uint64_t t_start,
                        std::uint64_t t_end) {
  if (t_end <= t_start) {
    throw ConfigError("slice interval [" + std::to_string(t_start) + ", " +
                      std::to_string(t_end) + ") is empty");
  }
  const auto lo = std::lower_bound(
      events.begin(), events.end(), t_start,
      [](const Event& e, std::uint64_t t) { return e.t < t; });
  const auto hi = std::lower_bound(
      lo, events.end(), t_end,
      [](const Event& e, std::uint64_t t) { return e.t < t; });
  return EventSlice{t_start, t_end,
                    events.subspan(std::size_t(lo - events.begin()),
                                   std::size_t(hi - lo))};
}

EventSlice slice_stream(const EventStream& stream, std::uint64_t t_start,
                        std::uint64_t t_end) {
  return slice_events(stream.events(), t_start, t_end);
}

EventFrame build_event_frame(const EventSlice& slice, Geometry geom) {
  EventFrame frame{geom, std::vector<std::int32_t>(geom.pixels(), 0)};
  for (const Event& e : slice.events) {
    if (e.x >= geom.w || e.y >= geom.h) {
      throw DataError("event at (" + std::to_string(e.x) + "," +
                      std::to_string(e.y) + ") outside geometry " +
                      std::to_string(geom.w) + "x" + std::to_string(geom.h));
    }
    frame.at(e.x, e.y) += e.p;
  }
  return frame;
}

EventVoxelGrid build_voxel_grid(const EventSlice& slice, int bins,
                                Geometry geom) {
  if (bins < 1) throw ConfigError("voxel grid needs at least one bin");
  if (slice.t_end <= slice.t_start) {
    throw ConfigError("degenerate slice interval");
  }
  EventVoxelGrid grid{bins, geom,
                      std::vector<std::int32_t>(std::size_t(bins) * geom.pixels(), 0)};
  const std::uint64_t span = slice.t_end - slice.t_start;
  for (const Event& e : slice.events) {
    if (e.x >= geom.w || e.y >= geom.h) {
      throw DataError("event at (" + std::to_string(e.x) + "," +
                      std::to_string(e.y) + ") outside geometry");
    }
    // b = floor(B * (t - t_start) / span); the clamp covers t == t_end,
    // which half-open slices never contain but closed callers might.
    std::uint64_t b =
        static_cast<std::uint64_t>(bins) * (e.t - slice.t_start) / span;
    if (b >= static_cast<std::uint64_t>(bins)) b = bins - 1;
    grid.at(int(b), e.x, e.y) += e.p;
  }
  return grid;
}

WindowIterator::WindowIterator(const EventStream& stream, std::uint64_t delta_us)
    : stream_(&stream), delta_(delta_us) {
  if (delta_ == 0) throw ConfigError("window width must be positive");
  if (!stream.empty()) {
    t0_ = stream.events().front().t;
    const std::uint64_t t_last = stream.events().back().t;
    count_ = std::size_t((t_last - t0_) / delta_) + 1;
  }
}

std::optional<EventSlice> WindowIterator::next() {
  if (index_ >= count_) return std::nullopt;
  const std::uint64_t start = t0_ + index_ * delta_;
  const std::uint64_t end = start + delta_;
  auto events = stream_->events();
  std::size_t first = cursor_;
  while (cursor_ < events.size() && events[cursor_].t < end) ++cursor_;
  ++index_;
  return EventSlice{start, end, events.subspan(first, cursor_ - first)};
}

}  // namespace evd
