#include "evodepth/event_io.hpp"

#include <fstream>

#include "evodepth/io_util.hpp"

namespace evd {

void write_events(const EventStream& stream, std::ostream& out) {
  io::Writer w(out);
  w.magic("EVT1");
  w.le<std::uint16_t>(stream.geometry().h);
  w.le<std::uint16_t>(stream.geometry().w);
  w.le<std::uint64_t>(stream.size());
  for (const Event& e : stream.events()) {
    w.le<std::uint64_t>(e.t);
    w.le<std::uint16_t>(e.x);
    w.le<std::uint16_t>(e.y);
    w.le<std::int8_t>(e.p);
  }
}

void write_events(const EventStream& stream, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_events(stream, out);
  if (!out) throw DataError("write failed for " + path.string());
}

EventStream read_events(std::istream& in) {
  io::Reader r(in);
  r.magic("EVT1", "event file header");
  Geometry geom;
  geom.h = r.le<std::uint16_t>("height");
  geom.w = r.le<std::uint16_t>("width");
  const std::uint64_t count = r.le<std::uint64_t>("event count");

  std::vector<Event> events;
  events.reserve(count);
  std::uint64_t prev_t = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t record_off = r.offset();
    Event e;
    e.t = r.le<std::uint64_t>("event timestamp");
    e.x = r.le<std::uint16_t>("event x");
    e.y = r.le<std::uint16_t>("event y");
    e.p = r.le<std::int8_t>("event polarity");
    if (e.p != -1 && e.p != 1) {
      throw FormatError("event polarity " + std::to_string(int(e.p)) +
                            " not in {-1,+1}",
                        record_off);
    }
    if (i > 0 && e.t < prev_t) {
      throw FormatError("non-monotone event timestamp", record_off);
    }
    if (e.x >= geom.w || e.y >= geom.h) {
      throw FormatError("event coordinate outside declared geometry",
                        record_off);
    }
    prev_t = e.t;
    events.push_back(e);
  }
  return EventStream(geom, std::move(events));
}

EventStream read_events(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_events(in);
}

}  // namespace evd
