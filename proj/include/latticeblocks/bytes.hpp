#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "latticeblocks/errors.hpp"

namespace latticeblocks {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

using Bytes = std::vector<std::byte>;

/// Appends little-endian scalars to a growing byte vector.
class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(Bytes& out) : out_(&out) {}

  template <typename U>
    requires std::is_arithmetic_v<U>
  void put(U value) {
    using Raw = std::conditional_t<sizeof(U) == 1, std::uint8_t,
                                   std::conditional_t<sizeof(U) == 2, std::uint16_t,
                                                      std::conditional_t<sizeof(U) == 4, std::uint32_t, std::uint64_t>>>;
    static_assert(sizeof(Raw) == sizeof(U));
    auto raw = std::bit_cast<Raw>(value);
    for (std::size_t b = 0; b < sizeof(U); ++b) {
      buffer().push_back(std::byte(raw & 0xFFu));
      if constexpr (sizeof(U) > 1) raw = Raw(raw >> 8);
    }
  }

  void put_bytes(std::span<const std::byte> bytes) { buffer().insert(buffer().end(), bytes.begin(), bytes.end()); }

  void put_string(std::string_view s) {
    put(std::uint32_t(s.size()));
    for (char c : s) buffer().push_back(std::byte(static_cast<unsigned char>(c)));
  }

  /// Bulk-append scalars; identical bytes to put() in a loop.
  template <typename U>
  void put_array(std::span<const U> values) {
    if constexpr (std::endian::native == std::endian::little) {
      const auto* p = reinterpret_cast<const std::byte*>(values.data());
      buffer().insert(buffer().end(), p, p + values.size_bytes());
    } else {
      for (U v : values) put(v);
    }
  }

  std::size_t size() const { return out_ ? out_->size() : own_.size(); }
  Bytes take() { return std::move(own_); }

 private:
  Bytes& buffer() { return out_ ? *out_ : own_; }

  Bytes* out_ = nullptr;
  Bytes own_;
};

/// Bounds-checked little-endian reader; running past the end is a protocol error.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  template <typename U>
    requires std::is_arithmetic_v<U>
  U get() {
    using Raw = std::conditional_t<sizeof(U) == 1, std::uint8_t,
                                   std::conditional_t<sizeof(U) == 2, std::uint16_t,
                                                      std::conditional_t<sizeof(U) == 4, std::uint32_t, std::uint64_t>>>;
    require(sizeof(U));
    Raw raw = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) raw |= Raw(Raw(std::to_integer<std::uint8_t>(bytes_[pos_ + b])) << (8 * b));
    pos_ += sizeof(U);
    return std::bit_cast<U>(raw);
  }

  std::span<const std::byte> get_bytes(std::size_t n) {
    require(n);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::string get_string() {
    const auto n = get<std::uint32_t>();
    auto raw = get_bytes(n);
    return std::string(reinterpret_cast<const char*>(raw.data()), raw.size());
  }

  template <typename U>
  void get_array(std::span<U> out) {
    if constexpr (std::endian::native == std::endian::little) {
      auto raw = get_bytes(out.size_bytes());
      std::memcpy(out.data(), raw.data(), raw.size());
    } else {
      for (auto& v : out) v = get<U>();
    }
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void require(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw ProtocolError("byte stream truncated: need " + std::to_string(n) + " bytes at offset " +
                          std::to_string(pos_) + ", have " + std::to_string(bytes_.size() - pos_));
    }
  }

  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace latticeblocks
