#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>

#include "wsnake/bytes.hpp"
#include "wsnake/curve.hpp"

namespace wsnake {

enum class HashAlgorithm { kSha256, kSha3_256 };

std::string hash_name(HashAlgorithm algo);
HashAlgorithm hash_by_name(std::string_view name);

/// The protocol hash h(.). Counted as one protocol-level hash.
Digest hash(ByteView data, HashAlgorithm algo = HashAlgorithm::kSha256);
/// Same function, tallied as implementation overhead instead.
Digest aux_hash(ByteView data, HashAlgorithm algo = HashAlgorithm::kSha256);

/// hash(0x02 ‖ x ‖ y): 32-byte digest of a finite point, used as an XOR operand.
Digest p2b(const GroupPoint& p, const CurveParams& curve, HashAlgorithm algo = HashAlgorithm::kSha256);
/// hash(0x01 ‖ x ‖ y): AE key derived from a finite point.
Digest kdf_key(const GroupPoint& p, const CurveParams& curve,
               HashAlgorithm algo = HashAlgorithm::kSha256);

inline constexpr std::uint8_t kNonceUserToGateway = 0x01;
inline constexpr std::uint8_t kNonceGatewayToUser = 0x02;

struct Ciphertext {
  std::uint8_t nonce_tag = 0;
  Bytes body;  // ciphertext ‖ 16-byte tag

  /// nonce_tag ‖ u16 length ‖ body
  Bytes encode() const;
  static Ciphertext decode(ByteView wire);

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

class AuthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// AES-256-GCM; the IV is the nonce tag right-aligned in 12 zero bytes, so a
/// key must never seal twice under the same tag.
Ciphertext ae_seal(const Digest& key, std::uint8_t nonce_tag, ByteView plaintext);
/// Throws AuthError on any key or ciphertext mismatch.
Bytes ae_open(const Digest& key, const Ciphertext& ct);

/// Injectable randomness for every protocol nonce and key.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  Digest digest();
  /// Uniform in [1, n) by rejection sampling.
  Scalar nonzero_scalar(const CurveParams& curve);
};

/// Deterministic generator for reproducible runs (not for deployment).
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(std::uint64_t seed) : engine_(seed) {}
  void fill(std::span<std::uint8_t> out) override;

 private:
  std::mt19937_64 engine_;
};

class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

}  // namespace wsnake
