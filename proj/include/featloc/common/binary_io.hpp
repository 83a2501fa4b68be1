#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "featloc/common/error.hpp"

namespace featloc {

namespace detail {
template <typename T>
T to_little_endian(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&value, bytes, sizeof(T));
  }
  return value;
}
}  // namespace detail

/// Little-endian writer for fixed-layout binary formats.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void bytes(const void* data, std::size_t size) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out_) throw Error("write failed");
  }

  template <typename T>
  void put(T value) {
    static_assert(std::is_arithmetic_v<T>);
    value = detail::to_little_endian(value);
    bytes(&value, sizeof(T));
  }

 private:
  std::ostream& out_;
};

/// Little-endian reader that reports the byte offset of any failure.
class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  void bytes(void* data, std::size_t size, const char* what) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
    if (static_cast<std::size_t>(in_.gcount()) != size) {
      throw FormatError(std::string("truncated file while reading ") + what, offset_ + in_.gcount());
    }
    offset_ += size;
  }

  template <typename T>
  T get(const char* what) {
    static_assert(std::is_arithmetic_v<T>);
    T value;
    bytes(&value, sizeof(T), what);
    return detail::to_little_endian(value);
  }

  std::uint64_t offset() const { return offset_; }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

}  // namespace featloc
