#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include "wsnake/bytes.hpp"
#include "wsnake/crypto.hpp"
#include "wsnake/curve.hpp"
#include "wsnake/messages.hpp"
#include "wsnake/result.hpp"

namespace wsnake::protocol {

/// Curve and hash shared by every party of one deployment.
struct Suite {
  const CurveParams* curve = &p256();
  HashAlgorithm hash_algo = HashAlgorithm::kSha256;

  const CurveParams& ec() const { return *curve; }
  Digest h(std::initializer_list<ByteView> fields) const;
};

inline constexpr Millis kDefaultFreshnessMs = 2000;
inline constexpr Millis kDefaultGraceMs = 24ULL * 60 * 60 * 1000;

struct Config {
  Millis freshness_ms = kDefaultFreshnessMs;
  bool replay_cache = true;
  Millis grace_ms = kDefaultGraceMs;
};

bool fresh(Millis sent, Millis now, Millis window);

struct Credentials {
  Bytes id;
  Bytes pw;
  Digest bmp = Digest::zero();  // all-zero when no biometric is enrolled
};

/// h(PW ‖ BMP ‖ q)
Digest make_uap(const Suite& suite, ByteView pw, const Digest& bmp, const Digest& q);

/// What the gateway writes to a fresh card; the user adds q.
struct CardIssuance {
  Digest c, d, z;
  std::string hash_id;
};

struct SmartCard {
  Digest c, d, z, q;
  std::string hash_id;

  friend bool operator==(const SmartCard&, const SmartCard&) = default;
};

struct UserRecord {
  Bytes id;
  Digest b;
  Digest z;
  std::optional<Digest> pending_b;
  Millis pending_deadline = 0;

  friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

class RegistrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gateway long-term key, user verifiers (indexed by B), sensor
/// authenticators, and the replay cache.
class GatewayState {
 public:
  GatewayState(Suite suite, Scalar secret, Config config = {});
  static GatewayState generate(Suite suite, RandomSource& rng, Config config = {});

  const Suite& suite() const { return suite_; }
  const Config& config() const { return config_; }
  Config& config() { return config_; }
  const Scalar& secret() const { return secret_; }
  const GroupPoint& public_key() const { return public_key_; }

  /// B = h(ID‖UAP‖z), C = h(ID‖S), D = h(C‖B‖z). Throws on a duplicate ID.
  CardIssuance register_user(ByteView id, const Digest& uap, RandomSource& rng);
  void provision_sensor(ByteView sid);
  /// AS = h(SID‖S). Throws RegistrationError for an unprovisioned SID.
  Digest register_sensor(ByteView sid);

  /// h(SID ‖ enc(S)); counted as a protocol hash.
  Digest sensor_authenticator(ByteView sid) const;
  /// h(ID ‖ enc(S))
  Digest card_proof(ByteView id) const;

  /// Record whose live verifier set contains `b` at time `now`. Before the
  /// grace deadline both B and pending_B match; after it only pending_B.
  const UserRecord* find_by_b(const Digest& b, Millis now) const;
  const UserRecord* find_by_id(ByteView id) const;
  std::optional<Digest> sensor_as(ByteView sid) const;
  bool provisioned(ByteView sid) const;

  void set_pending_b(ByteView id, const Digest& b_new, Millis deadline);
  /// Retires the old B once B_new has authenticated (or the deadline passed).
  void promote_pending(ByteView id);

  bool replay_seen(const Digest& b, Millis t1) const;
  void remember(const Digest& b, Millis t1, Millis now);
  std::size_t replay_cache_size() const { return replay_cache_.size(); }

  const std::map<Bytes, UserRecord>& users() const { return users_; }
  const std::map<Bytes, Digest>& sensors() const { return sensors_; }
  const std::set<Bytes>& provisioned_sids() const { return provisioned_; }

  /// Restores a record verbatim (used by the DB loader).
  void restore_user(UserRecord rec);
  void restore_sensor(ByteView sid, const Digest& as);

  /// Equality of everything except the replay cache.
  bool same_persistent_state(const GatewayState& other) const;

 private:
  Suite suite_;
  Scalar secret_;
  GroupPoint public_key_;
  Config config_;
  std::map<Bytes, UserRecord> users_;
  std::map<Digest, Bytes> b_index_;
  std::map<Bytes, Digest> sensors_;
  std::set<Bytes> provisioned_;
  std::set<std::pair<Digest, Millis>> replay_cache_;
};

struct SensorState {
  Bytes sid;
  Digest as;
  friend bool operator==(const SensorState&, const SensorState&) = default;
};

/// User side of registration: samples q, builds UAP, asks the gateway, and
/// stores q on the returned card.
SmartCard register_user(GatewayState& gw, const Credentials& creds, RandomSource& rng);
SensorState register_sensor(GatewayState& gw, ByteView sid);

/// Returns B* iff the recomputed D matches the card.
Result<Digest> user_login(const Suite& suite, const SmartCard& card, const Credentials& creds);

struct UserSession {
  Scalar a;
  GroupPoint e2;
  Digest ae_key;
  Digest b;
  Bytes sid;
  Millis t1 = 0;
};

struct GatewaySession {
  GroupPoint e2;
  Digest ae_key;
  Digest e4;
  Scalar c;
  Bytes user_id;
  Digest b;  // the verifier the user presented
  Digest z;
  Bytes sid;
  Digest as;
  Millis t2 = 0;
};

std::pair<M1, UserSession> user_auth_init(const Suite& suite, const Digest& b_star, ByteView sid,
                                          Millis t1, const GroupPoint& gateway_pub,
                                          RandomSource& rng);

Result<std::pair<M2, GatewaySession>> gw_on_m1(GatewayState& gw, const M1& m1, Millis t2,
                                               RandomSource& rng);

Result<std::pair<M3, Digest>> sensor_on_m2(const Suite& suite, const Config& config,
                                           const SensorState& sensor, const M2& m2, Millis t3,
                                           RandomSource& rng);

Result<std::pair<M4, Digest>> gw_on_m3(GatewayState& gw, const GatewaySession& ctx, const M3& m3,
                                       Millis t4);

Result<Digest> user_on_m4(const Suite& suite, const Config& config, const SmartCard& card,
                          const UserSession& ctx, const M4& m4, Millis t5);

struct PasswordChangeSession {
  Scalar a;
  GroupPoint e2;
  Digest ae_key;
  Bytes id;
  Digest uap_new;
  Digest q_new;
};

Result<std::pair<PC1, PasswordChangeSession>> user_pc_request(
    const Suite& suite, const SmartCard& card, const Credentials& old_creds, ByteView new_pw,
    Millis t1, const GroupPoint& gateway_pub, RandomSource& rng);

Result<PC2> gw_on_pc(GatewayState& gw, const PC1& pc1, Millis t2);

/// Returns the updated card: q := q_new, D := h(C‖B_new‖z). C and z unchanged.
Result<SmartCard> user_pc_confirm(const Suite& suite, const Config& config, const SmartCard& card,
                                  const PasswordChangeSession& ctx, const PC2& pc2, Millis t3);

}  // namespace wsnake::protocol
