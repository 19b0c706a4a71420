#include "wsnake/bytes.hpp"

#include "wsnake/opcount.hpp"

namespace wsnake {

Digest Digest::from(ByteView b) {
  if (b.size() != kDigestSize) {
    throw CodecError("digest must be 32 bytes, got " + std::to_string(b.size()));
  }
  Digest d;
  std::copy(b.begin(), b.end(), d.bytes.begin());
  return d;
}

std::string Digest::hex() const { return to_hex(view()); }

std::string to_hex(ByteView b) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (auto c : b) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 0x0f]);
  }
  return out;
}

namespace {
int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw CodecError(std::string("invalid hex digit '") + c + "'");
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw CodecError("odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return out;
}

Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

Digest xor_bytes(const Digest& a, const Digest& b) {
  opcount::record_xor();
  Digest out;
  for (std::size_t i = 0; i < kDigestSize; ++i) out.bytes[i] = a.bytes[i] ^ b.bytes[i];
  return out;
}

Bytes xor_bytes(ByteView a, ByteView b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("xor_bytes: length mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  opcount::record_xor();
  Bytes out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

Bytes u64_be(std::uint64_t v) {
  Bytes out;
  put_u64(out, v);
  return out;
}

void put_lp(Bytes& out, ByteView field) {
  if (field.size() > 0xffff) throw CodecError("field longer than 65535 bytes");
  put_u16(out, static_cast<std::uint16_t>(field.size()));
  out.insert(out.end(), field.begin(), field.end());
}

Bytes frame(std::initializer_list<ByteView> fields) {
  Bytes out;
  for (auto f : fields) put_lp(out, f);
  return out;
}

std::uint8_t Reader::u8() { return take(1)[0]; }

std::uint16_t Reader::u16() {
  auto b = take(2);
  return static_cast<std::uint16_t>(b[0] << 8 | b[1]);
}

std::uint32_t Reader::u32() {
  auto b = take(4);
  std::uint32_t v = 0;
  for (auto c : b) v = v << 8 | c;
  return v;
}

std::uint64_t Reader::u64() {
  auto b = take(8);
  std::uint64_t v = 0;
  for (auto c : b) v = v << 8 | c;
  return v;
}

ByteView Reader::take(std::size_t n) {
  if (n > remaining()) {
    throw CodecError("truncated input: need " + std::to_string(n) + " bytes, have " +
                     std::to_string(remaining()));
  }
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

ByteView Reader::lp() { return take(u16()); }

Digest Reader::lp_digest() { return Digest::from(lp()); }

std::uint64_t Reader::lp_u64() {
  auto field = lp();
  if (field.size() != 8) throw CodecError("timestamp field must be 8 bytes");
  Reader r(field);
  return r.u64();
}

void Reader::expect_done() const {
  if (!done()) throw CodecError(std::to_string(remaining()) + " trailing bytes");
}

}  // namespace wsnake
