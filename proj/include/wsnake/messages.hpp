#pragma once

#include <cstdint>
#include <string_view>
#include <variant>

#include "wsnake/bytes.hpp"
#include "wsnake/crypto.hpp"
#include "wsnake/curve.hpp"

namespace wsnake::protocol {

/// Simulated milliseconds.
using Millis = std::uint64_t;

// Wire layout: one type byte, then every field as u16 length ‖ bytes in the
// order declared below. Points use encode_point, ciphertexts
// Ciphertext::encode, timestamps 8-byte big-endian.

/// user -> gateway: e1 = a.G, e3 = E(B*, SID, T1)
struct M1 {
  GroupPoint e1;
  Ciphertext e3;
};

/// gateway -> sensor
struct M2 {
  Digest sp1;
  Digest sp2;
  Millis t2 = 0;
  GroupPoint e5;
};

/// sensor -> gateway
struct M3 {
  GroupPoint e6;
  Digest gp;
  Millis t3 = 0;
};

/// gateway -> user: e7 = E(B, SKU, T4)
struct M4 {
  Ciphertext e7;
};

/// Password-change request (the PCR tag is the type byte).
struct PC1 {
  GroupPoint e1;
  Ciphertext e3;
};

/// Password-change confirmation: E(B_new, T2).
struct PC2 {
  Ciphertext ct;
};

using Message = std::variant<M1, M2, M3, M4, PC1, PC2>;

enum class MessageType : std::uint8_t {
  kM1 = 0x01,
  kM2 = 0x02,
  kM3 = 0x03,
  kM4 = 0x04,
  kPC1 = 0x11,
  kPC2 = 0x12,
};

MessageType type_of(const Message& m);
std::string_view type_name(MessageType t);

Bytes encode(const Message& m, const CurveParams& curve);
/// Throws CodecError / ValidationError on anything malformed, including a
/// point at infinity or an off-curve point in any point field.
Message decode(ByteView wire, const CurveParams& curve);

/// One decoded field: name plus its wire bytes. Used by transcripts and the
/// field-mutation tests.
struct FieldView {
  std::string_view name;
  Bytes bytes;
};
std::vector<FieldView> fields_of(const Message& m, const CurveParams& curve);

}  // namespace wsnake::protocol
