#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include "evodepth/events.hpp"

namespace evd {

// EVT1 container: magic "EVT1", u16 H, u16 W, u64 count, then 13-byte
// records (u64 t_us, u16 x, u16 y, i8 p), all little-endian.
void write_events(const EventStream& stream, std::ostream& out);
void write_events(const EventStream& stream, const std::filesystem::path& path);

EventStream read_events(std::istream& in);
EventStream read_events(const std::filesystem::path& path);

}  // namespace evd
