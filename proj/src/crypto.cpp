#include "wsnake/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include "wsnake/opcount.hpp"

namespace wsnake {

namespace {

constexpr std::size_t kGcmTagSize = 16;
constexpr std::size_t kGcmIvSize = 12;

const EVP_MD* md_for(HashAlgorithm algo) {
  switch (algo) {
    case HashAlgorithm::kSha256:
      return EVP_sha256();
    case HashAlgorithm::kSha3_256:
      return EVP_sha3_256();
  }
  throw std::invalid_argument("unknown hash algorithm");
}

Digest digest_raw(ByteView data, HashAlgorithm algo) {
  Digest out;
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.bytes.data(), &len, md_for(algo), nullptr) != 1 ||
      len != kDigestSize) {
    throw std::runtime_error("EVP_Digest failed");
  }
  return out;
}

Digest point_digest(std::uint8_t domain, const GroupPoint& p, const CurveParams& curve,
                    HashAlgorithm algo) {
  if (p.is_infinity()) throw ValidationError("point at infinity has no canonical encoding");
  Bytes buf{domain};
  auto x = bigint_to_fixed(p.x(), curve.field_bytes());
  auto y = bigint_to_fixed(p.y(), curve.field_bytes());
  buf.insert(buf.end(), x.begin(), x.end());
  buf.insert(buf.end(), y.begin(), y.end());
  return aux_hash(buf, algo);
}

struct CipherCtx {
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  ~CipherCtx() { EVP_CIPHER_CTX_free(ctx); }
};

std::array<std::uint8_t, kGcmIvSize> iv_for(std::uint8_t nonce_tag) {
  std::array<std::uint8_t, kGcmIvSize> iv{};
  iv.back() = nonce_tag;
  return iv;
}

}  // namespace

std::string hash_name(HashAlgorithm algo) {
  switch (algo) {
    case HashAlgorithm::kSha256:
      return "sha256";
    case HashAlgorithm::kSha3_256:
      return "sha3-256";
  }
  return "unknown";
}

HashAlgorithm hash_by_name(std::string_view name) {
  if (name == "sha256") return HashAlgorithm::kSha256;
  if (name == "sha3-256") return HashAlgorithm::kSha3_256;
  throw std::invalid_argument("unknown hash '" + std::string(name) + "'");
}

Digest hash(ByteView data, HashAlgorithm algo) {
  opcount::record_hash();
  return digest_raw(data, algo);
}

Digest aux_hash(ByteView data, HashAlgorithm algo) {
  opcount::record_aux_hash();
  return digest_raw(data, algo);
}

Digest p2b(const GroupPoint& p, const CurveParams& curve, HashAlgorithm algo) {
  return point_digest(0x02, p, curve, algo);
}

Digest kdf_key(const GroupPoint& p, const CurveParams& curve, HashAlgorithm algo) {
  return point_digest(0x01, p, curve, algo);
}

Bytes Ciphertext::encode() const {
  Bytes out{nonce_tag};
  put_lp(out, body);
  return out;
}

Ciphertext Ciphertext::decode(ByteView wire) {
  Reader r(wire);
  Ciphertext ct;
  ct.nonce_tag = r.u8();
  auto body = r.lp();
  ct.body.assign(body.begin(), body.end());
  r.expect_done();
  return ct;
}

Ciphertext ae_seal(const Digest& key, std::uint8_t nonce_tag, ByteView plaintext) {
  opcount::record_sym();
  CipherCtx c;
  auto iv = iv_for(nonce_tag);
  Ciphertext ct{nonce_tag, Bytes(plaintext.size() + kGcmTagSize)};
  int len = 0;
  int total = 0;
  if (!c.ctx || EVP_EncryptInit_ex(c.ctx, EVP_aes_256_gcm(), nullptr, key.bytes.data(), iv.data()) != 1 ||
      EVP_EncryptUpdate(c.ctx, ct.body.data(), &len, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1) {
    throw std::runtime_error("AES-GCM encryption failed");
  }
  total = len;
  if (EVP_EncryptFinal_ex(c.ctx, ct.body.data() + total, &len) != 1) {
    throw std::runtime_error("AES-GCM finalization failed");
  }
  total += len;
  if (EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_GET_TAG, kGcmTagSize, ct.body.data() + total) != 1) {
    throw std::runtime_error("AES-GCM tag extraction failed");
  }
  return ct;
}

Bytes ae_open(const Digest& key, const Ciphertext& ct) {
  opcount::record_sym();
  if (ct.body.size() < kGcmTagSize) throw AuthError("ciphertext shorter than tag");
  const auto msg_len = ct.body.size() - kGcmTagSize;
  CipherCtx c;
  auto iv = iv_for(ct.nonce_tag);
  Bytes plain(msg_len);
  Bytes tag(ct.body.end() - kGcmTagSize, ct.body.end());
  int len = 0;
  if (!c.ctx || EVP_DecryptInit_ex(c.ctx, EVP_aes_256_gcm(), nullptr, key.bytes.data(), iv.data()) != 1 ||
      EVP_DecryptUpdate(c.ctx, plain.data(), &len, ct.body.data(), static_cast<int>(msg_len)) != 1 ||
      EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_TAG, kGcmTagSize, tag.data()) != 1) {
    throw AuthError("AES-GCM decryption failed");
  }
  int final_len = 0;
  if (EVP_DecryptFinal_ex(c.ctx, plain.data() + len, &final_len) != 1) {
    throw AuthError("authentication tag mismatch");
  }
  return plain;
}

Digest RandomSource::digest() {
  Digest d;
  fill(d.bytes);
  return d;
}

Scalar RandomSource::nonzero_scalar(const CurveParams& curve) {
  const auto& n = curve.order();
  const auto bits = mpz_sizeinbase(n.get_mpz_t(), 2);
  Bytes buf(curve.scalar_bytes());
  const unsigned excess = static_cast<unsigned>(buf.size() * 8 - bits);
  for (;;) {
    fill(buf);
    buf[0] &= static_cast<std::uint8_t>(0xff >> excess);
    BigInt v = bigint_from_bytes(buf);
    if (v != 0 && v < n) return Scalar(std::move(v), curve);
  }
}

void SeededRandom::fill(std::span<std::uint8_t> out) {
  for (std::size_t i = 0; i < out.size(); i += 8) {
    auto word = engine_();
    for (std::size_t j = 0; j < 8 && i + j < out.size(); ++j) {
      out[i + j] = static_cast<std::uint8_t>(word >> (8 * j));
    }
  }
}

void SystemRandom::fill(std::span<std::uint8_t> out) {
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    throw std::runtime_error("RAND_bytes failed");
  }
}

}  // namespace wsnake
