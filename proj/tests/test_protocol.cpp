#include <doctest.h>

#include "oracles.hpp"
#include "wsnake/opcount.hpp"
#include "wsnake/protocol.hpp"
#include "wsnake/storage.hpp"

using namespace wsnake;
using namespace wsnake::protocol;

namespace {

constexpr Millis kT0 = 1'700'000'000'000ULL;

struct World {
  Suite suite;
  SeededRandom rng;
  GatewayState gw;
  Credentials alice{to_bytes("alice"), to_bytes("correct horse"), Digest::zero()};
  SmartCard card;
  SensorState sensor;

  explicit World(const CurveParams& curve = toy_curve(), std::uint64_t seed = 1)
      : suite{&curve, HashAlgorithm::kSha256},
        rng(seed),
        gw(GatewayState::generate(suite, rng)) {
    alice.bmp = oracle::sha256(to_bytes("alice-fingerprint"));
    card = register_user(gw, alice, rng);
    gw.provision_sensor(to_bytes("sensor-7"));
    sensor = register_sensor(gw, to_bytes("sensor-7"));
  }
};

struct HandshakeKeys {
  Digest user, gateway, sensor;
  opcount::OpCounts user_ops, gateway_ops, sensor_ops;
};

HandshakeKeys handshake(World& w, Millis t = kT0) {
  HandshakeKeys out;
  UserSession us;
  M1 m1;
  {
    opcount::CountingScope s(out.user_ops);
    auto b = user_login(w.suite, w.card, w.alice).value();
    std::tie(m1, us) = user_auth_init(w.suite, b, w.sensor.sid, t, w.gw.public_key(), w.rng);
  }
  M2 m2;
  GatewaySession gs;
  {
    opcount::CountingScope s(out.gateway_ops);
    std::tie(m2, gs) = gw_on_m1(w.gw, m1, t + 10, w.rng).value();
  }
  M3 m3;
  {
    opcount::CountingScope s(out.sensor_ops);
    std::tie(m3, out.sensor) = sensor_on_m2(w.suite, w.gw.config(), w.sensor, m2, t + 20, w.rng).value();
  }
  M4 m4;
  {
    opcount::CountingScope s(out.gateway_ops);
    std::tie(m4, out.gateway) = gw_on_m3(w.gw, gs, m3, t + 30).value();
  }
  {
    opcount::CountingScope s(out.user_ops);
    out.user = user_on_m4(w.suite, w.gw.config(), w.card, us, m4, t + 40).value();
  }
  return out;
}

bool contains(const Bytes& hay, const Bytes& needle) {
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace

TEST_CASE("make_uap framing") {
  Suite suite;
  Digest q;
  q.bytes.fill(0x11);
  auto uap = make_uap(suite, to_bytes("pw"), Digest::zero(), q);
  CHECK(uap == make_uap(suite, to_bytes("pw"), Digest::zero(), q));
  CHECK(uap.hex() == "b0661a30485aeb4a68b8bb69a2020eb7cd56416b053a2cb2b296ba1b1ce01885");
  CHECK(uap == oracle::sha256(oracle::lp_concat({to_bytes("pw"), Bytes(32, 0), Bytes(32, 0x11)})));
  Digest q2 = q;
  q2.bytes[0] = 0x12;
  CHECK(make_uap(suite, to_bytes("pw"), Digest::zero(), q2) != uap);
}

TEST_CASE("user registration") {
  World w;
  const auto* rec = w.gw.find_by_id(w.alice.id);
  REQUIRE(rec != nullptr);
  const auto uap = make_uap(w.suite, w.alice.pw, w.alice.bmp, w.card.q);
  const auto enc_s = w.gw.secret().encode(w.suite.ec());
  const auto b = oracle::sha256(oracle::lp_concat({w.alice.id, uap.to_bytes(), rec->z.to_bytes()}));
  const auto c = oracle::sha256(oracle::lp_concat({w.alice.id, enc_s}));
  CHECK(rec->b == b);
  CHECK(w.card.c == c);
  CHECK(w.card.z == rec->z);
  CHECK(w.card.d == oracle::sha256(oracle::lp_concat({c.to_bytes(), b.to_bytes(), rec->z.to_bytes()})));
  CHECK(w.card.hash_id == "sha256");
  CHECK_THROWS_AS(register_user(w.gw, w.alice, w.rng), RegistrationError);
}

TEST_CASE("sensor registration") {
  World w;
  const auto enc_s = w.gw.secret().encode(w.suite.ec());
  CHECK(w.sensor.as == oracle::sha256(oracle::lp_concat({to_bytes("sensor-7"), enc_s})));
  CHECK(w.gw.register_sensor(to_bytes("sensor-7")) == w.sensor.as);
  CHECK_THROWS_AS(w.gw.register_sensor(to_bytes("sensor-99")), RegistrationError);
}

TEST_CASE("login") {
  World w;
  auto ok = user_login(w.suite, w.card, w.alice);
  REQUIRE(ok);
  CHECK(ok.value() == w.gw.find_by_id(w.alice.id)->b);

  auto wrong_pw = w.alice;
  wrong_pw.pw = to_bytes("incorrect horse");
  CHECK(user_login(w.suite, w.card, wrong_pw).reason() == RejectReason::kLoginFailed);

  auto wrong_bmp = w.alice;
  wrong_bmp.bmp.bytes[31] ^= 1;
  CHECK(user_login(w.suite, w.card, wrong_bmp).reason() == RejectReason::kLoginFailed);
}

TEST_CASE("honest handshake: three equal keys and exact op counts") {
  for (const CurveParams* curve : {&toy_curve(), &p256()}) {
    World w(*curve, 42);
    auto k = handshake(w);
    CHECK(k.user == k.gateway);
    CHECK(k.gateway == k.sensor);
    CHECK(k.user_ops.hash == 3);
    CHECK(k.user_ops.ecc == 2);
    CHECK(k.user_ops.sym == 2);
    CHECK(k.gateway_ops.hash == 4);
    CHECK(k.gateway_ops.ecc == 3);
    CHECK(k.gateway_ops.sym == 2);
    CHECK(k.sensor_ops.hash == 3);
    CHECK(k.sensor_ops.ecc == 2);
    CHECK(k.sensor_ops.sym == 0);
  }
}

TEST_CASE("fresh ephemeral scalars give distinct e1") {
  World w(p256(), 3);
  auto b = user_login(w.suite, w.card, w.alice).value();
  std::set<Bytes> seen;
  for (int i = 0; i < 200; ++i) {
    auto [m1, ctx] = user_auth_init(w.suite, b, w.sensor.sid, kT0, w.gw.public_key(), w.rng);
    CHECK(seen.insert(encode_point(m1.e1, w.suite.ec())).second);
    CHECK(scalar_mult(w.gw.secret(), m1.e1, w.suite.ec()) == ctx.e2);
  }
}

TEST_CASE("gateway M1 checks") {
  World w(p256(), 5);
  auto b = user_login(w.suite, w.card, w.alice).value();
  auto [m1, us] = user_auth_init(w.suite, b, w.sensor.sid, kT0, w.gw.public_key(), w.rng);

  SUBCASE("replay within the window hits the cache") {
    REQUIRE(gw_on_m1(w.gw, m1, kT0 + 5, w.rng));
    CHECK(gw_on_m1(w.gw, m1, kT0 + 50, w.rng).reason() == RejectReason::kReplay);
  }
  SUBCASE("replay cache off accepts the duplicate") {
    w.gw.config().replay_cache = false;
    REQUIRE(gw_on_m1(w.gw, m1, kT0 + 5, w.rng));
    CHECK(gw_on_m1(w.gw, m1, kT0 + 50, w.rng));
  }
  SUBCASE("stale T1") {
    CHECK(gw_on_m1(w.gw, m1, kT0 + kDefaultFreshnessMs + 1, w.rng).reason() == RejectReason::kStale);
    CHECK(gw_on_m1(w.gw, m1, kT0 + kDefaultFreshnessMs, w.rng));
  }
  SUBCASE("garbage e3 costs one EC mult and one open") {
    M1 bad = m1;
    bad.e3.body.assign(40, 0xAB);
    opcount::OpCounts ops;
    Result<std::pair<M2, GatewaySession>> r = reject(RejectReason::kMalformed);
    {
      opcount::CountingScope s(ops);
      r = gw_on_m1(w.gw, bad, kT0 + 5, w.rng);
    }
    CHECK(r.reason() == RejectReason::kDecryptFailed);
    CHECK(ops.ecc == 1);
    CHECK(ops.sym == 1);
    CHECK(ops.hash == 0);
  }
  SUBCASE("unknown SID is a routing rejection") {
    auto [m1x, ux] = user_auth_init(w.suite, b, to_bytes("sensor-404"), kT0, w.gw.public_key(), w.rng);
    CHECK(gw_on_m1(w.gw, m1x, kT0 + 5, w.rng).reason() == RejectReason::kUnknownSensor);
  }
  SUBCASE("unknown B") {
    auto [m1x, ux] = user_auth_init(w.suite, w.rng.digest(), w.sensor.sid, kT0, w.gw.public_key(), w.rng);
    CHECK(gw_on_m1(w.gw, m1x, kT0 + 5, w.rng).reason() == RejectReason::kUnknownUser);
  }
}

TEST_CASE("sensor and gateway verification failures") {
  World w(toy_curve(), 8);
  auto b = user_login(w.suite, w.card, w.alice).value();
  auto [m1, us] = user_auth_init(w.suite, b, w.sensor.sid, kT0, w.gw.public_key(), w.rng);
  auto [m2, gs] = gw_on_m1(w.gw, m1, kT0 + 1, w.rng).value();
  const auto& cfg = w.gw.config();

  SUBCASE("flipped SP1 bit fails SP2") {
    for (int bit = 0; bit < 256; ++bit) {
      M2 bad = m2;
      bad.sp1.bytes[bit / 8] ^= static_cast<std::uint8_t>(1 << (bit % 8));
      CHECK(sensor_on_m2(w.suite, cfg, w.sensor, bad, kT0 + 2, w.rng).reason() == RejectReason::kGatewayAuth);
    }
  }
  SUBCASE("stale T2") {
    CHECK(sensor_on_m2(w.suite, cfg, w.sensor, m2, kT0 + 1 + cfg.freshness_ms + 1, w.rng).reason() ==
          RejectReason::kStale);
  }
  SUBCASE("forged e6 with the original GP") {
    auto [m3, sk] = sensor_on_m2(w.suite, cfg, w.sensor, m2, kT0 + 2, w.rng).value();
    M3 bad = m3;
    bad.e6 = point_add(bad.e6, w.suite.ec().generator(), w.suite.ec());
    if (bad.e6.is_infinity()) bad.e6 = w.suite.ec().generator();
    CHECK(gw_on_m3(w.gw, gs, bad, kT0 + 3).reason() == RejectReason::kSensorAuth);
    CHECK(gw_on_m3(w.gw, gs, m3, kT0 + 3 + cfg.freshness_ms + 1).reason() == RejectReason::kStale);
  }
}

TEST_CASE("user M4 checks") {
  World w(p256(), 9);
  auto b = user_login(w.suite, w.card, w.alice).value();
  auto run_to_m4 = [&](Millis t) {
    auto [m1, us] = user_auth_init(w.suite, b, w.sensor.sid, t, w.gw.public_key(), w.rng);
    auto [m2, gs] = gw_on_m1(w.gw, m1, t + 1, w.rng).value();
    auto [m3, sk] = sensor_on_m2(w.suite, w.gw.config(), w.sensor, m2, t + 2, w.rng).value();
    auto [m4, gsk] = gw_on_m3(w.gw, gs, m3, t + 3).value();
    return std::pair{m4, us};
  };
  auto [m4a, usa] = run_to_m4(kT0);
  auto [m4b, usb] = run_to_m4(kT0 + 100);
  const auto& cfg = w.gw.config();

  CHECK(user_on_m4(w.suite, cfg, w.card, usa, m4a, kT0 + 4));
  CHECK(user_on_m4(w.suite, cfg, w.card, usb, m4a, kT0 + 104).reason() == RejectReason::kDecryptFailed);
  M4 tampered = m4b;
  tampered.e7.body[3] ^= 0x10;
  CHECK(user_on_m4(w.suite, cfg, w.card, usb, tampered, kT0 + 104).reason() == RejectReason::kDecryptFailed);
  CHECK(user_on_m4(w.suite, cfg, w.card, usb, m4b, kT0 + 103 + cfg.freshness_ms + 1).reason() ==
        RejectReason::kStale);
  auto other = usb;
  other.b = w.rng.digest();
  CHECK(user_on_m4(w.suite, cfg, w.card, other, m4b, kT0 + 104).reason() == RejectReason::kGatewayAuth);
}

TEST_CASE("T1 and T4 never travel in the clear; T2 and T3 do") {
  World w(p256(), 10);
  const auto& ec = w.suite.ec();
  const Millis t1 = kT0, t2 = kT0 + 1, t3 = kT0 + 2, t4 = kT0 + 3;
  auto b = user_login(w.suite, w.card, w.alice).value();
  auto [m1, us] = user_auth_init(w.suite, b, w.sensor.sid, t1, w.gw.public_key(), w.rng);
  auto [m2, gs] = gw_on_m1(w.gw, m1, t2, w.rng).value();
  auto [m3, sk] = sensor_on_m2(w.suite, w.gw.config(), w.sensor, m2, t3, w.rng).value();
  auto [m4, gsk] = gw_on_m3(w.gw, gs, m3, t4).value();
  Bytes wire;
  for (const Message& m : {Message(m1), Message(m2), Message(m3), Message(m4)}) {
    auto e = encode(m, ec);
    wire.insert(wire.end(), e.begin(), e.end());
  }
  CHECK_FALSE(contains(wire, u64_be(t1)));
  CHECK_FALSE(contains(wire, u64_be(t4)));
  CHECK(contains(encode(m2, ec), u64_be(t2)));
  CHECK(contains(encode(m3, ec), u64_be(t3)));
}

TEST_CASE("rejections leave gateway state untouched") {
  World w(toy_curve(), 12);
  auto b = user_login(w.suite, w.card, w.alice).value();
  auto [m1, us] = user_auth_init(w.suite, b, w.sensor.sid, kT0, w.gw.public_key(), w.rng);
  const GatewayState before = w.gw;
  M1 bad = m1;
  bad.e3.body[0] ^= 1;
  CHECK_FALSE(gw_on_m1(w.gw, bad, kT0 + 1, w.rng));
  CHECK_FALSE(gw_on_m1(w.gw, m1, kT0 + 10'000, w.rng));
  CHECK(w.gw.same_persistent_state(before));
  CHECK(w.gw.replay_cache_size() == 0);
}

TEST_CASE("password change") {
  World w(p256(), 20);
  const auto& cfg = w.gw.config();
  const auto new_pw = to_bytes("battery staple");
  auto with_new = w.alice;
  with_new.pw = new_pw;
  const auto z_before = w.gw.find_by_id(w.alice.id)->z;
  const auto b_old = w.gw.find_by_id(w.alice.id)->b;

  SUBCASE("wrong old password emits nothing") {
    auto bad = w.alice;
    bad.pw = to_bytes("nope");
    CHECK(user_pc_request(w.suite, w.card, bad, new_pw, kT0, w.gw.public_key(), w.rng).reason() ==
          RejectReason::kLoginFailed);
  }

  SUBCASE("completed change, then promotion on first auth with B_new") {
    auto [pc1, ctx] = user_pc_request(w.suite, w.card, w.alice, new_pw, kT0, w.gw.public_key(), w.rng).value();
    auto pc2 = gw_on_pc(w.gw, pc1, kT0 + 1).value();
    REQUIRE(w.gw.find_by_id(w.alice.id)->pending_b.has_value());
    CHECK(w.gw.find_by_b(b_old, kT0 + 1) != nullptr);

    auto card2 = user_pc_confirm(w.suite, cfg, w.card, ctx, pc2, kT0 + 2).value();
    CHECK(card2.c == w.card.c);
    CHECK(card2.z == w.card.z);
    CHECK(card2.q != w.card.q);
    CHECK(card2.d != w.card.d);
    CHECK(w.gw.find_by_id(w.alice.id)->z == z_before);
    CHECK(user_login(w.suite, card2, with_new));
    CHECK(user_login(w.suite, card2, w.alice).reason() == RejectReason::kLoginFailed);

    w.card = card2;
    w.alice = with_new;
    auto k = handshake(w, kT0 + 100);
    CHECK(k.user == k.sensor);
    const auto* rec = w.gw.find_by_id(w.alice.id);
    CHECK_FALSE(rec->pending_b.has_value());
    CHECK(rec->b != b_old);
    CHECK(w.gw.find_by_b(b_old, kT0 + 200) == nullptr);
  }

  SUBCASE("lost PC2 keeps the old credentials working") {
    auto [pc1, ctx] = user_pc_request(w.suite, w.card, w.alice, new_pw, kT0, w.gw.public_key(), w.rng).value();
    REQUIRE(gw_on_pc(w.gw, pc1, kT0 + 1));
    auto k = handshake(w, kT0 + 100);
    CHECK(k.user == k.gateway);
    CHECK(w.gw.find_by_id(w.alice.id)->pending_b.has_value());
  }

  SUBCASE("old B expires at the grace deadline") {
    auto [pc1, ctx] = user_pc_request(w.suite, w.card, w.alice, new_pw, kT0, w.gw.public_key(), w.rng).value();
    REQUIRE(gw_on_pc(w.gw, pc1, kT0 + 1));
    CHECK(w.gw.find_by_b(b_old, kT0 + 1 + cfg.grace_ms) != nullptr);
    CHECK(w.gw.find_by_b(b_old, kT0 + 2 + cfg.grace_ms) == nullptr);
  }

  SUBCASE("forged PC2 leaves the card unchanged") {
    auto [pc1, ctx] = user_pc_request(w.suite, w.card, w.alice, new_pw, kT0, w.gw.public_key(), w.rng).value();
    auto pc2 = gw_on_pc(w.gw, pc1, kT0 + 1).value();
    PC2 forged = pc2;
    forged.ct.body.back() ^= 1;
    CHECK(user_pc_confirm(w.suite, cfg, w.card, ctx, forged, kT0 + 2).reason() == RejectReason::kDecryptFailed);
    // Validly sealed but carrying a different B_new.
    PC2 wrong_b{ae_seal(ctx.ae_key, kNonceGatewayToUser, frame({w.rng.digest().view(), u64_be(kT0 + 1)}))};
    CHECK(user_pc_confirm(w.suite, cfg, w.card, ctx, wrong_b, kT0 + 2).reason() == RejectReason::kGatewayAuth);
  }

  SUBCASE("B* mismatch changes nothing") {
    SmartCard impostor = w.card;
    auto other = w.alice;
    other.id = to_bytes("mallory");
    // Build a login-valid card for a different ID so the request reaches the gateway.
    SeededRandom r2(99);
    impostor = register_user(w.gw, other, r2);
    const GatewayState before = w.gw;
    auto [pc1, ctx] = user_pc_request(w.suite, impostor, other, new_pw, kT0, w.gw.public_key(), w.rng).value();
    // Re-seal the request claiming alice's ID with mallory's B*.
    Bytes plain = frame({w.alice.id, user_login(w.suite, impostor, other).value().view(), ctx.uap_new.view(),
                         u64_be(kT0)});
    PC1 spliced{pc1.e1, ae_seal(ctx.ae_key, kNonceUserToGateway, plain)};
    CHECK(gw_on_pc(w.gw, spliced, kT0 + 1).reason() == RejectReason::kUnknownUser);
    CHECK(w.gw.same_persistent_state(before));
  }

  SUBCASE("PC1 replayed after the window") {
    auto [pc1, ctx] = user_pc_request(w.suite, w.card, w.alice, new_pw, kT0, w.gw.public_key(), w.rng).value();
    CHECK(gw_on_pc(w.gw, pc1, kT0 + cfg.freshness_ms + 1).reason() == RejectReason::kStale);
  }
}

TEST_CASE("message codec") {
  World w(p256(), 30);
  const auto& ec = w.suite.ec();
  auto b = user_login(w.suite, w.card, w.alice).value();
  auto [m1, us] = user_auth_init(w.suite, b, w.sensor.sid, kT0, w.gw.public_key(), w.rng);
  auto wire = encode(m1, ec);
  CHECK(wire[0] == 0x01);
  CHECK(encode(decode(wire, ec), ec) == wire);
  CHECK_THROWS(decode(Bytes{0x7f}, ec));
  CHECK_THROWS(decode(Bytes(wire.begin(), wire.end() - 1), ec));
  // Point at infinity is not a valid e1.
  M1 inf = m1;
  inf.e1 = GroupPoint::infinity();
  CHECK_THROWS_AS(decode(encode(inf, ec), ec), CodecError);
}

TEST_CASE("gateway DB and card files roundtrip bit-exactly") {
  World w(p256(), 40);
  auto other = w.alice;
  other.id = to_bytes("bob");
  (void)register_user(w.gw, other, w.rng);
  w.gw.provision_sensor(to_bytes("sensor-unregistered"));
  w.gw.set_pending_b(other.id, w.rng.digest(), kT0 + 5);

  auto bytes = storage::serialize_gateway(w.gw);
  CHECK(std::equal(storage::kDbMagic.begin(), storage::kDbMagic.end(), bytes.begin()));
  auto loaded = storage::parse_gateway(bytes);
  CHECK(loaded.same_persistent_state(w.gw));
  CHECK(storage::serialize_gateway(loaded) == bytes);
  CHECK(loaded.public_key() == w.gw.public_key());

  auto card_bytes = storage::serialize_card(w.card);
  CHECK(storage::parse_card(card_bytes) == w.card);
  CHECK(storage::serialize_card(storage::parse_card(card_bytes)) == card_bytes);

  const auto sensor = register_sensor(w.gw, to_bytes("sensor-unregistered"));
  const auto sensor_bytes = storage::serialize_sensor(sensor);
  CHECK(storage::parse_sensor(sensor_bytes) == sensor);
  CHECK_THROWS_AS(storage::parse_sensor(card_bytes), CodecError);

  bytes[3] ^= 1;
  CHECK_THROWS_AS(storage::parse_gateway(bytes), CodecError);
}
