#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "evodepth/errors.hpp"

namespace evd::io {

// Little-endian primitive codec over iostreams, tracking the byte offset
// so parse errors can point at the failing record.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint64_t offset() const { return offset_; }

  void bytes(void* dst, std::size_t n, const char* what) {
    in_.read(reinterpret_cast<char*>(dst), std::streamsize(n));
    if (std::size_t(in_.gcount()) != n) {
      throw FormatError(std::string("truncated while reading ") + what, offset_);
    }
    offset_ += n;
  }

  template <typename T>
  T le(const char* what) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    bytes(buf, sizeof(T), what);
    T v{};
    // x86 is little-endian; assemble explicitly anyway.
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      acc |= std::uint64_t(buf[i]) << (8 * i);
    }
    std::memcpy(&v, &acc, sizeof(T));
    return v;
  }

  float f32(const char* what) {
    const std::uint32_t bits = le<std::uint32_t>(what);
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }

  void magic(const char expect[4], const char* what) {
    char m[4];
    bytes(m, 4, what);
    if (std::memcmp(m, expect, 4) != 0) {
      throw FormatError(std::string("bad magic for ") + what + ", expected '" +
                            std::string(expect, 4) + "'",
                        offset_ - 4);
    }
  }

  bool at_eof() {
    in_.peek();
    return in_.eof();
  }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const void* src, std::size_t n) {
    out_.write(reinterpret_cast<const char*>(src), std::streamsize(n));
  }

  template <typename T>
  void le(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::uint64_t acc = 0;
    std::memcpy(&acc, &v, sizeof(T));
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf[i] = static_cast<unsigned char>(acc >> (8 * i));
    }
    bytes(buf, sizeof(T));
  }

  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof(v));
    le(bits);
  }

  void magic(const char m[4]) { bytes(m, 4); }

 private:
  std::ostream& out_;
};

}  // namespace evd::io
