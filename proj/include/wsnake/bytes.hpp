#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wsnake {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::size_t kDigestSize = 32;

/// Fixed 32-byte value: hash outputs and every XOR operand in the protocol.
struct Digest {
  std::array<std::uint8_t, kDigestSize> bytes{};

  static Digest from(ByteView b);
  static Digest zero() { return Digest{}; }

  ByteView view() const { return {bytes.data(), bytes.size()}; }
  Bytes to_bytes() const { return Bytes(bytes.begin(), bytes.end()); }
  std::string hex() const;

  friend bool operator==(const Digest&, const Digest&) = default;
  friend auto operator<=>(const Digest&, const Digest&) = default;
};

class CodecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string to_hex(ByteView b);
Bytes from_hex(std::string_view hex);
Bytes to_bytes(std::string_view s);

Digest xor_bytes(const Digest& a, const Digest& b);
/// Byte-string XOR; throws std::invalid_argument on a length mismatch.
Bytes xor_bytes(ByteView a, ByteView b);

void put_u16(Bytes& out, std::uint16_t v);
void put_u32(Bytes& out, std::uint32_t v);
void put_u64(Bytes& out, std::uint64_t v);
Bytes u64_be(std::uint64_t v);

/// Appends a 2-byte big-endian length and then the field.
void put_lp(Bytes& out, ByteView field);

/// Length-prefixed framing of a field list, the "‖" used in every hash input.
Bytes frame(std::initializer_list<ByteView> fields);

/// Bounds-checked sequential reader; every failure is a CodecError.
class Reader {
 public:
  explicit Reader(ByteView data) : data_(data) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  ByteView take(std::size_t n);
  ByteView lp();
  Digest lp_digest();
  std::uint64_t lp_u64();

  bool done() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }
  void expect_done() const;

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace wsnake
