#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "wsnake/crypto.hpp"
#include "wsnake/curve.hpp"
#include "wsnake/opcount.hpp"

using namespace wsnake;

namespace {

GroupPoint to_point(const oracle::ToyCurve::Pt& p) {
  if (!p) return GroupPoint::infinity();
  return {p->first, p->second};
}

std::vector<GroupPoint> all_toy_points() {
  std::vector<GroupPoint> pts{GroupPoint::infinity()};
  for (auto [x, y] : oracle::ToyCurve::enumerate()) pts.emplace_back(x, y);
  return pts;
}

}  // namespace

TEST_CASE("toy curve order matches exhaustive enumeration") {
  const auto& c = toy_curve();
  const auto affine = oracle::ToyCurve::enumerate();
  CHECK(affine.size() + 1 == 19);
  CHECK(c.order() == 19);
  // Prime order: every finite point generates the whole group.
  for (auto [x, y] : affine) {
    CHECK_FALSE(oracle::ToyCurve::iterated(19, std::pair{x, y}).has_value());
  }
  CHECK(c.field_bytes() == 1);
  CHECK(c.scalar_bytes() == 1);
}

TEST_CASE("point_add identity, inverse and doubling") {
  const auto& c = toy_curve();
  const auto& g = c.generator();
  CHECK(point_add(g, GroupPoint::infinity(), c) == g);
  CHECK(point_add(GroupPoint::infinity(), g, c) == g);
  CHECK(point_add(g, point_negate(g, c), c).is_infinity());
  CHECK(point_add(g, g, c) == GroupPoint(6, 3));
}

TEST_CASE("point_add agrees with the plain-int oracle on every pair") {
  const auto& c = toy_curve();
  const auto pts = all_toy_points();
  auto as_oracle = [](const GroupPoint& p) -> oracle::ToyCurve::Pt {
    if (p.is_infinity()) return std::nullopt;
    return std::pair{static_cast<int>(p.x().get_si()), static_cast<int>(p.y().get_si())};
  };
  for (const auto& p : pts) {
    for (const auto& q : pts) {
      CHECK(point_add(p, q, c) == to_point(oracle::ToyCurve::add(as_oracle(p), as_oracle(q))));
    }
  }
}

TEST_CASE("group laws hold exhaustively on the toy curve") {
  const auto& c = toy_curve();
  const auto pts = all_toy_points();
  for (const auto& p : pts) {
    CHECK(point_add(p, point_negate(p, c), c).is_infinity());
    for (const auto& q : pts) {
      const auto pq = point_add(p, q, c);
      CHECK(c.on_curve(pq));
      CHECK(pq == point_add(q, p, c));
      for (const auto& r : pts) {
        CHECK(point_add(pq, r, c) == point_add(p, point_add(q, r, c), c));
      }
    }
  }
}

TEST_CASE("point_add rejects off-curve input") {
  const auto& c = toy_curve();
  CHECK_THROWS_AS(point_add(GroupPoint(1, 1), c.generator(), c), ValidationError);
  CHECK_THROWS_AS(scalar_mult(Scalar(3, c), GroupPoint(1, 1), c), ValidationError);
}

TEST_CASE("scalar_mult matches iterated addition for every k in [0, n)") {
  const auto& c = toy_curve();
  const oracle::ToyCurve::Pt g = std::pair{5, 1};
  for (int k = 0; k < 19; ++k) {
    CHECK(scalar_mult(Scalar(k, c), c.generator(), c) == to_point(oracle::ToyCurve::iterated(k, g)));
  }
  CHECK(scalar_mult(Scalar(0, c), c.generator(), c).is_infinity());
  CHECK(scalar_mult(Scalar(1, c), c.generator(), c) == c.generator());
  CHECK_THROWS_AS(Scalar(19, c), ValidationError);
}

TEST_CASE("P-256 parameters and scalar_mult agree with OpenSSL") {
  const auto& c = p256();
  CHECK(c.field_bytes() == 32);
  CHECK(c.scalar_bytes() == 32);
  SeededRandom rng(7);
  for (int i = 0; i < 20; ++i) {
    auto k = rng.nonzero_scalar(c);
    auto ours = scalar_mult(k, c.generator(), c);
    auto [x, y] = oracle::p256_mul_base(k.value().get_str(16));
    CHECK(to_hex(bigint_to_fixed(ours.x(), 32)) == x);
    CHECK(to_hex(bigint_to_fixed(ours.y(), 32)) == y);
  }
}

TEST_CASE("ECDH agreement over 1000 random scalar pairs") {
  for (const CurveParams* c : {&toy_curve(), &p256()}) {
    SeededRandom rng(11);
    const int runs = c == &toy_curve() ? 1000 : 200;
    for (int i = 0; i < runs; ++i) {
      auto a = rng.nonzero_scalar(*c);
      auto s = rng.nonzero_scalar(*c);
      const auto& g = c->generator();
      CHECK(scalar_mult(a, scalar_mult(s, g, *c), *c) == scalar_mult(s, scalar_mult(a, g, *c), *c));
    }
  }
}

TEST_CASE("point encoding roundtrip and rejection") {
  const auto& c = p256();
  SeededRandom rng(3);
  auto pt = scalar_mult(rng.nonzero_scalar(c), c.generator(), c);
  auto enc = encode_point(pt, c);
  CHECK(enc.size() == 65);
  CHECK(enc[0] == 0x04);
  CHECK(decode_point(enc, c) == pt);
  CHECK(decode_point(encode_point(GroupPoint::infinity(), c), c).is_infinity());
  enc[64] ^= 1;
  CHECK_THROWS_AS(decode_point(enc, c), ValidationError);
  enc[0] = 0x03;
  CHECK_THROWS_AS(decode_point(enc, c), CodecError);
}

TEST_CASE("hash determinism, length and pinned vectors") {
  auto empty = hash(Bytes{});
  auto a = hash(to_bytes("a"));
  CHECK(empty == hash(Bytes{}));
  CHECK(empty.bytes.size() == 32);
  CHECK(empty.hex() == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(a.hex() == "ca978112ca1bbdcafac231b39a23dc4da786eff8147c4e72b9807785afee48bb");
  CHECK(hash(Bytes{}, HashAlgorithm::kSha3_256).hex() ==
        "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a");
  CHECK(hash_by_name(hash_name(HashAlgorithm::kSha3_256)) == HashAlgorithm::kSha3_256);
}

TEST_CASE("p2b and kdf_key on the toy generator") {
  const auto& c = toy_curve();
  const auto& g = c.generator();
  CHECK(p2b(g, c).hex() == "ff9192ad3f2791ecea4bbd738e7488898dd01f12a5604ceb5bf3bba7be213b15");
  CHECK(kdf_key(g, c).hex() == "cccf6121efa5d90e210d86739af2f778c4fe50194cd39e4994d16c51393c5b8d");
  CHECK(p2b(g, c) == oracle::sha256({0x02, 5, 1}));
  CHECK(p2b(g, c) != kdf_key(g, c));
  CHECK_THROWS_AS(p2b(GroupPoint::infinity(), c), ValidationError);
  CHECK_THROWS_AS(kdf_key(GroupPoint::infinity(), c), ValidationError);
}

TEST_CASE("kdf_key(a*X) equals kdf_key(S*(a*G))") {
  const auto& c = p256();
  SeededRandom rng(5);
  for (int i = 0; i < 10; ++i) {
    auto s = rng.nonzero_scalar(c);
    auto a = rng.nonzero_scalar(c);
    auto x = scalar_mult(s, c.generator(), c);
    CHECK(kdf_key(scalar_mult(a, x, c), c) == kdf_key(scalar_mult(s, scalar_mult(a, c.generator(), c), c), c));
  }
}

TEST_CASE("AE roundtrip, wrong key, and every single-bit flip") {
  SeededRandom rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const auto key = rng.digest();
    Bytes msg(static_cast<std::size_t>(trial * 13 + 1));
    rng.fill(msg);
    const auto ct = ae_seal(key, kNonceUserToGateway, msg);
    CHECK(ae_open(key, ct) == msg);
    CHECK(Ciphertext::decode(ct.encode()) == ct);

    auto other = key;
    other.bytes[trial] ^= 0x80;
    CHECK_THROWS_AS(ae_open(other, ct), AuthError);

    for (std::size_t i = 0; i < ct.body.size() * 8; ++i) {
      auto bad = ct;
      bad.body[i / 8] ^= static_cast<std::uint8_t>(1u << (i % 8));
      CHECK_THROWS_AS(ae_open(key, bad), AuthError);
    }
    auto retagged = ct;
    retagged.nonce_tag = kNonceGatewayToUser;
    CHECK_THROWS_AS(ae_open(key, retagged), AuthError);
  }
}

TEST_CASE("xor_bytes is an exponent-2 abelian group operation") {
  SeededRandom rng(13);
  for (int i = 0; i < 200; ++i) {
    auto a = rng.digest(), b = rng.digest(), c = rng.digest();
    CHECK(xor_bytes(a, a) == Digest::zero());
    CHECK(xor_bytes(a, Digest::zero()) == a);
    CHECK(xor_bytes(a, b) == xor_bytes(b, a));
    CHECK(xor_bytes(xor_bytes(a, b), c) == xor_bytes(a, xor_bytes(b, c)));
  }
  CHECK_THROWS_AS(xor_bytes(ByteView(Bytes(3).data(), 3), ByteView(Bytes(4).data(), 4)), std::invalid_argument);
}

TEST_CASE("instrumentation counts only inside a scope") {
  const auto& c = toy_curve();
  opcount::OpCounts counts;
  (void)hash(Bytes{});
  {
    opcount::CountingScope scope(counts);
    (void)hash(Bytes{});
    (void)p2b(c.generator(), c);
    (void)scalar_mult(Scalar(2, c), c.generator(), c);
    (void)xor_bytes(Digest::zero(), Digest::zero());
    {
      opcount::PauseScope pause;
      (void)hash(Bytes{});
    }
    (void)ae_seal(Digest::zero(), 1, Bytes{});
  }
  CHECK(counts.hash == 1);
  CHECK(counts.aux_hash == 1);
  CHECK(counts.ecc == 1);
  CHECK(counts.sym == 1);
  CHECK(counts.xorops == 1);
}
