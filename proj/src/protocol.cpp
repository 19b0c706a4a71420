#include "wsnake/protocol.hpp"

#include <algorithm>

namespace wsnake::protocol {

namespace {

Bytes ts(Millis t) { return u64_be(t); }

std::string window_detail(Millis sent, Millis now, Millis window) {
  return "sent " + std::to_string(sent) + " ms, received " + std::to_string(now) + " ms, window " +
         std::to_string(window) + " ms";
}

}  // namespace

Digest Suite::h(std::initializer_list<ByteView> fields) const { return hash(frame(fields), hash_algo); }

bool fresh(Millis sent, Millis now, Millis window) {
  const Millis diff = sent > now ? sent - now : now - sent;
  return diff <= window;
}

Digest make_uap(const Suite& suite, ByteView pw, const Digest& bmp, const Digest& q) {
  return suite.h({pw, bmp.view(), q.view()});
}

// ---------------------------------------------------------------------------
// GatewayState

GatewayState::GatewayState(Suite suite, Scalar secret, Config config)
    : suite_(suite),
      secret_(std::move(secret)),
      public_key_(scalar_mult(secret_, suite_.ec().generator(), suite_.ec())),
      config_(config) {
  if (secret_.value() == 0) throw ValidationError("gateway secret must be nonzero");
}

GatewayState GatewayState::generate(Suite suite, RandomSource& rng, Config config) {
  return GatewayState(suite, rng.nonzero_scalar(suite.ec()), config);
}

Digest GatewayState::sensor_authenticator(ByteView sid) const {
  return suite_.h({sid, secret_.encode(suite_.ec())});
}

Digest GatewayState::card_proof(ByteView id) const {
  return suite_.h({id, secret_.encode(suite_.ec())});
}

CardIssuance GatewayState::register_user(ByteView id, const Digest& uap, RandomSource& rng) {
  Bytes key(id.begin(), id.end());
  if (users_.contains(key)) throw RegistrationError("user ID already registered");
  const Digest z = rng.digest();
  const Digest b = suite_.h({id, uap.view(), z.view()});
  if (b_index_.contains(b)) throw RegistrationError("verifier collision");
  const Digest c = card_proof(id);
  const Digest d = suite_.h({c.view(), b.view(), z.view()});
  users_.emplace(key, UserRecord{key, b, z, std::nullopt, 0});
  b_index_.emplace(b, key);
  return {c, d, z, hash_name(suite_.hash_algo)};
}

void GatewayState::provision_sensor(ByteView sid) { provisioned_.emplace(sid.begin(), sid.end()); }

Digest GatewayState::register_sensor(ByteView sid) {
  if (!provisioned(sid)) throw RegistrationError("unknown SID; provide a valid sensor identity");
  Digest as = sensor_authenticator(sid);
  sensors_.insert_or_assign(Bytes(sid.begin(), sid.end()), as);
  return as;
}

const UserRecord* GatewayState::find_by_b(const Digest& b, Millis now) const {
  auto it = b_index_.find(b);
  if (it == b_index_.end()) return nullptr;
  const auto& rec = users_.at(it->second);
  if (rec.pending_b && *rec.pending_b == b) return &rec;
  if (rec.b == b && (!rec.pending_b || now <= rec.pending_deadline)) return &rec;
  return nullptr;
}

const UserRecord* GatewayState::find_by_id(ByteView id) const {
  auto it = users_.find(Bytes(id.begin(), id.end()));
  return it == users_.end() ? nullptr : &it->second;
}

std::optional<Digest> GatewayState::sensor_as(ByteView sid) const {
  auto it = sensors_.find(Bytes(sid.begin(), sid.end()));
  if (it == sensors_.end()) return std::nullopt;
  return it->second;
}

bool GatewayState::provisioned(ByteView sid) const {
  return provisioned_.contains(Bytes(sid.begin(), sid.end()));
}

void GatewayState::set_pending_b(ByteView id, const Digest& b_new, Millis deadline) {
  auto& rec = users_.at(Bytes(id.begin(), id.end()));
  if (rec.pending_b) b_index_.erase(*rec.pending_b);
  auto [it, inserted] = b_index_.emplace(b_new, rec.id);
  if (!inserted && it->second != rec.id) throw RegistrationError("verifier collision");
  rec.pending_b = b_new;
  rec.pending_deadline = deadline;
}

void GatewayState::promote_pending(ByteView id) {
  auto& rec = users_.at(Bytes(id.begin(), id.end()));
  if (!rec.pending_b) return;
  if (*rec.pending_b != rec.b) b_index_.erase(rec.b);
  rec.b = *rec.pending_b;
  rec.pending_b.reset();
  rec.pending_deadline = 0;
}

bool GatewayState::replay_seen(const Digest& b, Millis t1) const {
  return replay_cache_.contains({b, t1});
}

void GatewayState::remember(const Digest& b, Millis t1, Millis now) {
  const Millis horizon = now > config_.freshness_ms ? now - config_.freshness_ms : 0;
  std::erase_if(replay_cache_, [&](const auto& e) { return e.second < horizon; });
  replay_cache_.emplace(b, t1);
}

void GatewayState::restore_user(UserRecord rec) {
  if (users_.contains(rec.id)) throw RegistrationError("duplicate user record");
  b_index_.emplace(rec.b, rec.id);
  if (rec.pending_b) b_index_.emplace(*rec.pending_b, rec.id);
  auto id = rec.id;
  users_.emplace(std::move(id), std::move(rec));
}

void GatewayState::restore_sensor(ByteView sid, const Digest& as) {
  sensors_.insert_or_assign(Bytes(sid.begin(), sid.end()), as);
}

bool GatewayState::same_persistent_state(const GatewayState& o) const {
  return suite_.curve == o.suite_.curve && suite_.hash_algo == o.suite_.hash_algo &&
         secret_ == o.secret_ && users_ == o.users_ && b_index_ == o.b_index_ &&
         sensors_ == o.sensors_ && provisioned_ == o.provisioned_;
}

// ---------------------------------------------------------------------------
// Registration

SmartCard register_user(GatewayState& gw, const Credentials& creds, RandomSource& rng) {
  const Digest q = rng.digest();
  const Digest uap = make_uap(gw.suite(), creds.pw, creds.bmp, q);
  auto issued = gw.register_user(creds.id, uap, rng);
  return {issued.c, issued.d, issued.z, q, issued.hash_id};
}

SensorState register_sensor(GatewayState& gw, ByteView sid) {
  return {Bytes(sid.begin(), sid.end()), gw.register_sensor(sid)};
}

// ---------------------------------------------------------------------------
// Authentication and key exchange

Result<Digest> user_login(const Suite& suite, const SmartCard& card, const Credentials& creds) {
  const Digest uap = make_uap(suite, creds.pw, creds.bmp, card.q);
  const Digest b_star = suite.h({creds.id, uap.view(), card.z.view()});
  const Digest d_star = suite.h({card.c.view(), b_star.view(), card.z.view()});
  if (d_star != card.d) return reject(RejectReason::kLoginFailed, "D check failed; try again");
  return b_star;
}

std::pair<M1, UserSession> user_auth_init(const Suite& suite, const Digest& b_star, ByteView sid,
                                          Millis t1, const GroupPoint& gateway_pub,
                                          RandomSource& rng) {
  const auto& ec = suite.ec();
  Scalar a = rng.nonzero_scalar(ec);
  GroupPoint e1 = scalar_mult(a, ec.generator(), ec);
  GroupPoint e2 = scalar_mult(a, gateway_pub, ec);
  Digest key = kdf_key(e2, ec, suite.hash_algo);
  Ciphertext e3 = ae_seal(key, kNonceUserToGateway, frame({b_star.view(), sid, ts(t1)}));
  return {M1{std::move(e1), std::move(e3)},
          UserSession{std::move(a), std::move(e2), key, b_star, Bytes(sid.begin(), sid.end()), t1}};
}

Result<std::pair<M2, GatewaySession>> gw_on_m1(GatewayState& gw, const M1& m1, Millis t2,
                                               RandomSource& rng) {
  const auto& suite = gw.suite();
  const auto& ec = suite.ec();
  if (m1.e1.is_infinity() || !ec.on_curve(m1.e1)) {
    return reject(RejectReason::kMalformed, "e1 is not a finite curve point");
  }
  GroupPoint e2 = scalar_mult(gw.secret(), m1.e1, ec);
  Digest key = kdf_key(e2, ec, suite.hash_algo);
  Bytes plain;
  try {
    plain = ae_open(key, m1.e3);
  } catch (const AuthError& e) {
    return reject(RejectReason::kDecryptFailed, e.what());
  }

  Digest b;
  Bytes sid;
  Millis t1 = 0;
  try {
    Reader r(plain);
    b = r.lp_digest();
    auto sid_view = r.lp();
    sid.assign(sid_view.begin(), sid_view.end());
    t1 = r.lp_u64();
    r.expect_done();
  } catch (const CodecError& e) {
    return reject(RejectReason::kMalformed, e.what());
  }

  const auto& cfg = gw.config();
  if (!fresh(t1, t2, cfg.freshness_ms)) {
    return reject(RejectReason::kStale, "T1 " + window_detail(t1, t2, cfg.freshness_ms));
  }
  if (cfg.replay_cache && gw.replay_seen(b, t1)) {
    return reject(RejectReason::kReplay, "(B, T1) already accepted");
  }
  const UserRecord* rec = gw.find_by_b(b, t2);
  if (!rec) return reject(RejectReason::kUnknownUser, "no live user record for B");
  auto stored_as = gw.sensor_as(sid);
  if (!stored_as) return reject(RejectReason::kUnknownSensor, "SID is not registered");

  // AS is re-derived from S, as the gateway "makes up AS = h(SID, S)".
  Digest as = gw.sensor_authenticator(sid);
  if (as != *stored_as) return reject(RejectReason::kUnknownSensor, "sensor record inconsistent");

  const Digest b_rand = rng.digest();
  Scalar c = rng.nonzero_scalar(ec);
  Digest e4 = xor_bytes(b_rand, p2b(e2, ec, suite.hash_algo));
  GroupPoint e5 = scalar_mult(c, ec.generator(), ec);
  Digest sp1 = xor_bytes(e4, as);
  Digest sp2 = suite.h({e4.view(), sid, ts(t2)});

  if (cfg.replay_cache) gw.remember(b, t1, t2);

  GatewaySession ctx{std::move(e2), key, e4, std::move(c), rec->id, b, rec->z, sid, as, t2};
  return std::pair{M2{sp1, sp2, t2, std::move(e5)}, std::move(ctx)};
}

Result<std::pair<M3, Digest>> sensor_on_m2(const Suite& suite, const Config& config,
                                           const SensorState& sensor, const M2& m2, Millis t3,
                                           RandomSource& rng) {
  const auto& ec = suite.ec();
  Digest e4 = xor_bytes(m2.sp1, sensor.as);
  if (suite.h({e4.view(), sensor.sid, ts(m2.t2)}) != m2.sp2) {
    return reject(RejectReason::kGatewayAuth, "SP2 mismatch");
  }
  if (!fresh(m2.t2, t3, config.freshness_ms)) {
    return reject(RejectReason::kStale, "T2 " + window_detail(m2.t2, t3, config.freshness_ms));
  }
  if (m2.e5.is_infinity() || !ec.on_curve(m2.e5)) {
    return reject(RejectReason::kMalformed, "e5 is not a finite curve point");
  }
  Scalar d = rng.nonzero_scalar(ec);
  Digest sk = suite.h({e4.view(), p2b(scalar_mult(d, m2.e5, ec), ec, suite.hash_algo).view()});
  GroupPoint e6 = scalar_mult(d, ec.generator(), ec);
  Digest gp = suite.h({sk.view(), sensor.as.view(), ts(t3)});
  return std::pair{M3{std::move(e6), gp, t3}, sk};
}

Result<std::pair<M4, Digest>> gw_on_m3(GatewayState& gw, const GatewaySession& ctx, const M3& m3,
                                       Millis t4) {
  const auto& suite = gw.suite();
  const auto& ec = suite.ec();
  if (m3.e6.is_infinity() || !ec.on_curve(m3.e6)) {
    return reject(RejectReason::kMalformed, "e6 is not a finite curve point");
  }
  Digest sk = suite.h({ctx.e4.view(), p2b(scalar_mult(ctx.c, m3.e6, ec), ec, suite.hash_algo).view()});
  if (suite.h({sk.view(), ctx.as.view(), ts(m3.t3)}) != m3.gp) {
    return reject(RejectReason::kSensorAuth, "GP mismatch");
  }
  const auto window = gw.config().freshness_ms;
  if (!fresh(m3.t3, t4, window)) {
    return reject(RejectReason::kStale, "T3 " + window_detail(m3.t3, t4, window));
  }
  Digest sku = xor_bytes(sk, ctx.z);
  Ciphertext e7 = ae_seal(ctx.ae_key, kNonceGatewayToUser, frame({ctx.b.view(), sku.view(), ts(t4)}));

  if (const auto* rec = gw.find_by_id(ctx.user_id); rec && rec->pending_b && *rec->pending_b == ctx.b) {
    gw.promote_pending(ctx.user_id);
  }
  return std::pair{M4{std::move(e7)}, sk};
}

Result<Digest> user_on_m4(const Suite&, const Config& config, const SmartCard& card,
                          const UserSession& ctx, const M4& m4, Millis t5) {
  Bytes plain;
  try {
    plain = ae_open(ctx.ae_key, m4.e7);
  } catch (const AuthError& e) {
    return reject(RejectReason::kDecryptFailed, e.what());
  }
  Digest b, sku;
  Millis t4 = 0;
  try {
    Reader r(plain);
    b = r.lp_digest();
    sku = r.lp_digest();
    t4 = r.lp_u64();
    r.expect_done();
  } catch (const CodecError& e) {
    return reject(RejectReason::kMalformed, e.what());
  }
  if (!fresh(t4, t5, config.freshness_ms)) {
    return reject(RejectReason::kStale, "T4 " + window_detail(t4, t5, config.freshness_ms));
  }
  if (b != ctx.b) return reject(RejectReason::kGatewayAuth, "returned B differs from B*");
  return xor_bytes(sku, card.z);
}

// ---------------------------------------------------------------------------
// Password change / update

Result<std::pair<PC1, PasswordChangeSession>> user_pc_request(
    const Suite& suite, const SmartCard& card, const Credentials& old_creds, ByteView new_pw,
    Millis t1, const GroupPoint& gateway_pub, RandomSource& rng) {
  auto login = user_login(suite, card, old_creds);
  if (!login) return login.error();
  const auto& ec = suite.ec();
  const Digest q_new = rng.digest();
  const Digest uap_new = make_uap(suite, new_pw, old_creds.bmp, q_new);
  Scalar a = rng.nonzero_scalar(ec);
  GroupPoint e1 = scalar_mult(a, ec.generator(), ec);
  GroupPoint e2 = scalar_mult(a, gateway_pub, ec);
  Digest key = kdf_key(e2, ec, suite.hash_algo);
  Ciphertext e3 = ae_seal(key, kNonceUserToGateway,
                          frame({old_creds.id, login.value().view(), uap_new.view(), ts(t1)}));
  return std::pair{PC1{std::move(e1), std::move(e3)},
                   PasswordChangeSession{std::move(a), std::move(e2), key, old_creds.id, uap_new, q_new}};
}

Result<PC2> gw_on_pc(GatewayState& gw, const PC1& pc1, Millis t2) {
  const auto& suite = gw.suite();
  const auto& ec = suite.ec();
  if (pc1.e1.is_infinity() || !ec.on_curve(pc1.e1)) {
    return reject(RejectReason::kMalformed, "e1 is not a finite curve point");
  }
  GroupPoint e2 = scalar_mult(gw.secret(), pc1.e1, ec);
  Digest key = kdf_key(e2, ec, suite.hash_algo);
  Bytes plain;
  try {
    plain = ae_open(key, pc1.e3);
  } catch (const AuthError& e) {
    return reject(RejectReason::kDecryptFailed, e.what());
  }
  Bytes id;
  Digest b_star, uap_new;
  Millis t1 = 0;
  try {
    Reader r(plain);
    auto id_view = r.lp();
    id.assign(id_view.begin(), id_view.end());
    b_star = r.lp_digest();
    uap_new = r.lp_digest();
    t1 = r.lp_u64();
    r.expect_done();
  } catch (const CodecError& e) {
    return reject(RejectReason::kMalformed, e.what());
  }
  const auto window = gw.config().freshness_ms;
  if (!fresh(t1, t2, window)) return reject(RejectReason::kStale, "T1 " + window_detail(t1, t2, window));
  const UserRecord* rec = gw.find_by_id(id);
  if (!rec || gw.find_by_b(b_star, t2) != rec) {
    return reject(RejectReason::kUnknownUser, "B* does not match the stored verifier");
  }
  const Digest b_new = suite.h({id, uap_new.view(), rec->z.view()});
  gw.set_pending_b(id, b_new, t2 + gw.config().grace_ms);
  return PC2{ae_seal(key, kNonceGatewayToUser, frame({b_new.view(), ts(t2)}))};
}

Result<SmartCard> user_pc_confirm(const Suite& suite, const Config& config, const SmartCard& card,
                                  const PasswordChangeSession& ctx, const PC2& pc2, Millis t3) {
  Bytes plain;
  try {
    plain = ae_open(ctx.ae_key, pc2.ct);
  } catch (const AuthError& e) {
    return reject(RejectReason::kDecryptFailed, e.what());
  }
  Digest b_new;
  Millis t2 = 0;
  try {
    Reader r(plain);
    b_new = r.lp_digest();
    t2 = r.lp_u64();
    r.expect_done();
  } catch (const CodecError& e) {
    return reject(RejectReason::kMalformed, e.what());
  }
  if (!fresh(t2, t3, config.freshness_ms)) {
    return reject(RejectReason::kStale, "T2 " + window_detail(t2, t3, config.freshness_ms));
  }
  if (suite.h({ctx.id, ctx.uap_new.view(), card.z.view()}) != b_new) {
    return reject(RejectReason::kGatewayAuth, "confirmed B_new does not match");
  }
  SmartCard updated = card;
  updated.q = ctx.q_new;
  updated.d = suite.h({card.c.view(), b_new.view(), card.z.view()});
  return updated;
}

}  // namespace wsnake::protocol

namespace wsnake {

std::string_view reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::kMalformed: return "malformed";
    case RejectReason::kDecryptFailed: return "decrypt-failed";
    case RejectReason::kStale: return "stale-timestamp";
    case RejectReason::kReplay: return "replay";
    case RejectReason::kUnknownUser: return "unknown-user";
    case RejectReason::kUnknownSensor: return "unknown-sensor";
    case RejectReason::kGatewayAuth: return "gateway-auth-failed";
    case RejectReason::kSensorAuth: return "sensor-auth-failed";
    case RejectReason::kLoginFailed: return "login-failed";
    case RejectReason::kNoPendingSession: return "no-pending-session";
  }
  return "unknown";
}

}  // namespace wsnake
