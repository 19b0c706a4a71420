#pragma once

#include <array>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wsnake/costmodel.hpp"
#include "wsnake/protocol.hpp"

namespace wsnake::simnet {

using protocol::Millis;

enum class Party : std::uint8_t { kUser = 0, kGateway = 1, kSensor = 2, kAdversary = 3 };
std::string_view party_name(Party p);

inline constexpr Millis kEpochMs = 1'700'000'000'000ULL;

/// Global simulated time plus per-party skew. Never reads the wall clock.
class SimClock {
 public:
  explicit SimClock(Millis start = kEpochMs, std::array<std::int64_t, 3> skew = {}) : now_(start), skew_(skew) {}

  Millis now() const { return now_; }
  /// Party-local reading: global time plus that party's skew.
  Millis local(Party p) const;
  /// Throws std::logic_error on an attempt to move backwards.
  void advance_to(Millis t);

 private:
  Millis now_;
  std::array<std::int64_t, 3> skew_;
};

struct SimConfig {
  const CurveParams* curve = &toy_curve();
  HashAlgorithm hash_algo = HashAlgorithm::kSha256;
  protocol::Config protocol;
  Millis start = kEpochMs;
  Millis hop_latency_ms = 5;
  std::array<std::int64_t, 3> skew{};  // user, gateway, sensor
};

/// One adversary instruction. Event indices refer to captured sends, in
/// order, within a single run.
struct Action {
  enum class Kind { kPass, kDrop, kDelay, kReplay, kMutate, kInject };
  Kind kind = Kind::kPass;
  std::size_t event = 0;       // target (pass/drop/delay/mutate) or source (replay)
  Millis ms = 0;               // delay amount, or absolute time for replay/inject
  std::size_t offset = 0;      // mutate: byte offset into the wire bytes
  std::uint8_t mask = 0;       // mutate: XOR mask
  Bytes bytes;                 // inject payload
  Party to = Party::kGateway;  // inject recipient

  static Action pass(std::size_t e) { return make(Kind::kPass, e); }
  static Action drop(std::size_t e) { return make(Kind::kDrop, e); }
  static Action delay(std::size_t e, Millis ms) { return make(Kind::kDelay, e, ms); }
  static Action replay(std::size_t e, Millis at) { return make(Kind::kReplay, e, at); }
  static Action mutate(std::size_t e, std::size_t offset, std::uint8_t mask) {
    auto a = make(Kind::kMutate, e);
    a.offset = offset;
    a.mask = mask;
    return a;
  }
  static Action inject(Bytes b, Millis at, Party to) {
    auto a = make(Kind::kInject, 0, at);
    a.bytes = std::move(b);
    a.to = to;
    return a;
  }

 private:
  static Action make(Kind k, std::size_t e, Millis ms = 0) {
    Action a;
    a.kind = k;
    a.event = e;
    a.ms = ms;
    return a;
  }
};

/// Dolev-Yao network control only: actions touch captured or literal bytes.
struct AdversaryScript {
  std::vector<Action> actions;
};

struct Event {
  std::size_t index = 0;
  Millis send_time = 0;
  Millis deliver_time = 0;
  Party from = Party::kUser;
  Party to = Party::kGateway;
  Bytes wire;
  bool delivered = false;
  std::string adversary;  // "pass", "drop", "delay", "mutate", "replay", "inject"
};

/// What a party did with one delivered event.
struct Step {
  std::size_t event = 0;
  Party party = Party::kUser;
  std::string message;  // decoded type, or "?" if undecodable
  bool accepted = false;
  std::optional<Rejection> rejection;
  std::optional<Digest> session_key;  // set when this step completed a session
};

struct Transcript {
  std::string curve_id;
  std::string hash_id;
  std::vector<Event> events;
  std::vector<Step> steps;
  std::array<opcount::OpCounts, 3> ops{};  // user, gateway, sensor
  std::optional<Rejection> login_rejection;

  std::vector<Digest> keys(Party p) const;
  std::vector<const Step*> rejections() const;
  /// Exactly one M1..M4 chain, all accepted, three equal keys.
  bool honest_complete() const;
  nlohmann::json to_json(const CurveParams& curve) const;
};

/// Party-tagged op tallies of a transcript. Throws std::invalid_argument
/// unless the transcript is one honest, complete handshake.
costmodel::CostProfile measure_counts(const Transcript& t);
/// Same tallies without the honesty requirement (probes, attacks).
costmodel::CostProfile observed_counts(const Transcript& t);

/// Deterministic world: one gateway, registered user "alice", registered
/// sensor "sensor-1", all randomness from a seeded generator.
class Simulation {
 public:
  Simulation(SimConfig cfg, std::uint64_t seed);

  const SimConfig& config() const { return cfg_; }
  const protocol::Suite& suite() const { return suite_; }
  protocol::GatewayState& gateway() { return gw_; }
  const protocol::GatewayState& gateway() const { return gw_; }
  const protocol::SensorState& sensor() const { return sensor_; }
  const protocol::SmartCard& card() const { return card_; }
  const protocol::Credentials& credentials() const { return creds_; }
  const SimClock& clock() const { return clock_; }
  RandomSource& rng() { return rng_; }

  /// Registers another user (uncounted setup) and returns its card.
  protocol::SmartCard enroll(const protocol::Credentials& creds);

  /// Alice logs in and requests a session with the registered sensor.
  Transcript handshake(const AdversaryScript& script = {});
  /// Arbitrary initiator; login failure is recorded, nothing is sent.
  Transcript handshake_as(const protocol::Credentials& creds, const protocol::SmartCard& card, ByteView sid,
                          const AdversaryScript& script = {});
  /// Alice changes her password; on confirmation her card and stored
  /// password are replaced.
  Transcript password_change(ByteView new_pw, const AdversaryScript& script = {});
  /// Only adversary injections; no honest initiator.
  Transcript inject_only(const AdversaryScript& script);

  /// User-side session context of the most recent handshake initiated in
  /// this world (known to that user, e.g. an insider).
  const std::optional<protocol::UserSession>& last_user_session() const { return last_user_session_; }

 private:
  struct Initiator;
  Transcript execute(const std::optional<Initiator>& init, const AdversaryScript& script);

  SimConfig cfg_;
  protocol::Suite suite_;
  SeededRandom rng_;
  SimClock clock_;
  protocol::GatewayState gw_;
  protocol::Credentials creds_;
  protocol::SmartCard card_;
  protocol::SensorState sensor_;
  std::optional<protocol::UserSession> last_user_session_;
};

/// Short, non-invertible tag for logs: 16 hex chars of h("fp" ‖ d).
std::string fingerprint(const Digest& d);

/// One honest handshake with a pass-through network.
Transcript run_session(std::uint64_t seed, const SimConfig& cfg = {});

/// Outcome of one honest handshake, reduced to comparable values.
struct SessionSummary {
  std::uint64_t seed = 0;
  bool complete = false;      // honest_complete()
  std::string key_fp;         // fingerprint of the user's key, if any
  costmodel::CostProfile ops;
  friend bool operator==(const SessionSummary&, const SessionSummary&) = default;
};

SessionSummary summarize(std::uint64_t seed, const Transcript& t);

/// One independent world per seed, in order.
std::vector<SessionSummary> run_sessions_serial(const std::vector<std::uint64_t>& seeds, const SimConfig& cfg = {});
/// Same results as the serial runner, with worlds spread over OpenMP threads.
std::vector<SessionSummary> run_sessions_parallel(const std::vector<std::uint64_t>& seeds, const SimConfig& cfg = {});

/// Ops the gateway spends on `bytes` delivered as if from the network.
costmodel::RoleCounts dos_probe(protocol::GatewayState& gw, ByteView bytes, Millis now, RandomSource& rng);
/// Ops the sensor spends on `bytes`.
costmodel::RoleCounts dos_probe_sensor(const protocol::Suite& suite, const protocol::Config& cfg,
                                       const protocol::SensorState& sensor, ByteView bytes, Millis now,
                                       RandomSource& rng);

}  // namespace wsnake::simnet
