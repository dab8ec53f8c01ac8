// Copyright the seismic contributors. Licensed under the Apache 2.0 license.
// See LICENSE in the project root.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "seismic/common.hpp"

namespace seismic {

// Little-endian primitives for the on-disk formats. Written byte by byte so
// the files are identical regardless of host endianness.

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void put_u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }

  void put_u32(std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(b, 4);
  }

  void put_u64(std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(b, 8);
  }

  void put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }

  void put_bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }

  bool good() const { return out_.good(); }

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::string context) : in_(in), context_(std::move(context)) {}

  std::uint8_t get_u8() {
    int c = in_.get();
    if (c == std::istream::traits_type::eof()) fail("unexpected end of file");
    return static_cast<std::uint8_t>(c);
  }

  std::uint32_t get_u32() {
    unsigned char b[4];
    read(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }

  std::uint64_t get_u64() {
    unsigned char b[8];
    read(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }

  float get_f32() { return std::bit_cast<float>(get_u32()); }

  void get_bytes(void* data, std::size_t n) { read(static_cast<unsigned char*>(data), n); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError(context_ + ": " + msg);
  }

  const std::string& context() const { return context_; }

 private:
  void read(unsigned char* dst, std::size_t n) {
    in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("unexpected end of file");
  }

  std::istream& in_;
  std::string context_;
};

}  // namespace seismic
