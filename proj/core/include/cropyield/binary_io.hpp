#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cropyield/errors.hpp"

namespace cropyield::io {

// Little-endian primitives. Multi-byte values are assembled byte by byte so
// the on-disk layout does not depend on host endianness.

inline void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

inline void put_f32(std::ostream& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

inline void put_bytes(std::ostream& out, std::string_view s) { out.write(s.data(), static_cast<std::streamsize>(s.size())); }

inline void put_f32_array(std::ostream& out, const float* values, std::size_t n) {
  std::vector<char> buf(n * 4);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = std::bit_cast<std::uint32_t>(values[i]);
    buf[4 * i] = static_cast<char>(v & 0xff);
    buf[4 * i + 1] = static_cast<char>((v >> 8) & 0xff);
    buf[4 * i + 2] = static_cast<char>((v >> 16) & 0xff);
    buf[4 * i + 3] = static_cast<char>((v >> 24) & 0xff);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

/// Sequential reader that tracks the byte offset for error reporting.
class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& source() const noexcept { return source_; }

  [[noreturn]] void fail(const std::string& what) const { throw FormatError(source_ + ": " + what, offset_); }

  void read(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got != n) {
      offset_ += got;
      fail(std::string("truncated while reading ") + what);
    }
    offset_ += n;
  }

  std::uint32_t u32(const char* what) {
    unsigned char b[4];
    read(reinterpret_cast<char*>(b), 4, what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }

  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

  std::string bytes(std::size_t n, const char* what) {
    std::string s(n, '\0');
    read(s.data(), n, what);
    return s;
  }

  void f32_array(float* dst, std::size_t n, const char* what) {
    std::vector<unsigned char> buf(n * 4);
    read(reinterpret_cast<char*>(buf.data()), buf.size(), what);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t v = static_cast<std::uint32_t>(buf[4 * i]) |
                              (static_cast<std::uint32_t>(buf[4 * i + 1]) << 8) |
                              (static_cast<std::uint32_t>(buf[4 * i + 2]) << 16) |
                              (static_cast<std::uint32_t>(buf[4 * i + 3]) << 24);
      dst[i] = std::bit_cast<float>(v);
    }
  }

  void expect_magic(std::string_view magic) {
    const std::size_t at = offset_;
    const std::string got = bytes(magic.size(), "magic");
    if (got != magic) throw FormatError(source_ + ": bad magic, expected \"" + std::string(magic) + "\"", at);
  }

  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) fail("trailing bytes after payload");
  }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t offset_ = 0;
};

}  // namespace cropyield::io
