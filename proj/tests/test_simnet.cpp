#include <doctest.h>

#include <set>

#include "wsnake/attacks.hpp"
#include "wsnake/simnet.hpp"

using namespace wsnake;
using namespace wsnake::simnet;
using protocol::M1;
using protocol::M2;
using protocol::M3;

namespace {

SimConfig cache_off() {
  SimConfig cfg;
  cfg.protocol.replay_cache = false;
  return cfg;
}

template <class T>
T decode_as(const Transcript& t, std::size_t i, const CurveParams& c = toy_curve()) {
  return std::get<T>(protocol::decode(t.events.at(i).wire, c));
}

}  // namespace

TEST_CASE("honest session: four events, three equal keys, exact op counts") {
  for (const CurveParams* c : {&toy_curve(), &p256()}) {
    SimConfig cfg;
    cfg.curve = c;
    const auto t = run_session(42, cfg);
    REQUIRE(t.honest_complete());
    CHECK(t.events.size() == 4);
    const auto counts = measure_counts(t);
    CHECK(counts.user.same_priced({3, 2, 2}));
    CHECK(counts.gateway.same_priced({4, 3, 2}));
    CHECK(counts.sensor.same_priced({3, 2, 0}));
    CHECK(counts == observed_counts(t));
  }
}

TEST_CASE("measure_counts refuses a transcript that is not one honest handshake") {
  Simulation sim({}, 1);
  const auto t = sim.handshake({{Action::drop(1)}});
  CHECK_FALSE(t.honest_complete());
  CHECK_THROWS_AS(measure_counts(t), std::invalid_argument);
}

TEST_CASE("same seed and config give byte-identical transcripts") {
  const auto a = run_session(7), b = run_session(7);
  CHECK(a.to_json(toy_curve()).dump() == b.to_json(toy_curve()).dump());
  for (const auto& name : attack_names()) {
    if (name == "tamper-any-bit") continue;
    CHECK(run_attack(name, 3).to_json() == run_attack(name, 3).to_json());
  }
}

TEST_CASE("pass-through adversary is neutral") {
  Simulation sim({}, 9);
  AdversaryScript passes{{Action::pass(0), Action::pass(1), Action::pass(2), Action::pass(3)}};
  const auto scripted = sim.handshake(passes);
  CHECK(scripted.to_json(toy_curve()).dump() == run_session(9).to_json(toy_curve()).dump());
}

TEST_CASE("wire bytes re-decode to the recorded fields") {
  const auto t = run_session(5);
  for (const auto& e : t.events) {
    const auto msg = protocol::decode(e.wire, toy_curve());
    CHECK(protocol::encode(msg, toy_curve()) == e.wire);
  }
  const auto j = t.to_json(toy_curve());
  CHECK(j["events"][1]["type"] == "M2");
  CHECK(j["events"][1]["fields"].contains("SP1"));
}

TEST_CASE("skew beyond the window is rejected by the first checking party") {
  SimConfig cfg;
  cfg.skew = {-3000, 0, 0};  // user clock 3 s behind
  auto t = run_session(1, cfg);
  REQUIRE(t.steps.size() == 1);
  CHECK(t.steps[0].party == Party::kGateway);
  CHECK(t.steps[0].rejection->reason == RejectReason::kStale);

  cfg.skew = {0, 0, 2500};  // sensor clock ahead
  t = run_session(1, cfg);
  REQUIRE(t.steps.size() == 2);
  CHECK(t.steps[1].party == Party::kSensor);
  CHECK(t.steps[1].rejection->reason == RejectReason::kStale);

  cfg.skew = {0, 1500, 0};  // within the window everywhere
  CHECK(run_session(1, cfg).honest_complete());
}

TEST_CASE("different seeds sample disjoint e1, e5, e6") {
  SimConfig cfg;
  cfg.curve = &p256();
  const auto a = run_session(100, cfg), b = run_session(101, cfg);
  CHECK_FALSE(decode_as<M1>(a, 0, p256()).e1 == decode_as<M1>(b, 0, p256()).e1);
  CHECK_FALSE(decode_as<M2>(a, 1, p256()).e5 == decode_as<M2>(b, 1, p256()).e5);
  CHECK_FALSE(decode_as<M3>(a, 2, p256()).e6 == decode_as<M3>(b, 2, p256()).e6);
  CHECK(a.keys(Party::kUser) != b.keys(Party::kUser));
}

TEST_CASE("delay past the window is a freshness rejection") {
  Simulation sim({}, 4);
  const auto t = sim.handshake({{Action::delay(1, 2500)}});
  REQUIRE(t.steps.size() == 2);
  CHECK(t.steps[1].rejection->reason == RejectReason::kStale);
  CHECK(t.keys(Party::kSensor).empty());
}

TEST_CASE("no catalog attack succeeds under the default configuration") {
  for (const auto& name : attack_names()) {
    CAPTURE(name);
    const auto out = run_attack(name, 11);
    CHECK(out.verdict == Verdict::kPrevented);
    CHECK(out.matches());
    for (const auto& c : out.checks) {
      CAPTURE(c.label);
      CHECK(c.ok);
    }
  }
  CHECK_THROWS_WITH_AS(run_attack("nope", 1), doctest::Contains("replay-m1-late"), std::invalid_argument);
}

TEST_CASE("replay inside the window: cache on prevents, cache off diverges") {
  const auto on = run_attack("replay-m1-fast", 2);
  CHECK(on.verdict == Verdict::kPrevented);
  CHECK(on.reason == "replay");

  const auto off = run_attack("replay-m1-fast", 2, cache_off());
  CHECK(off.verdict == Verdict::kSucceeded);
  CHECK(off.divergent());
  CHECK(off.to_text().find("DIVERGENCE") != std::string::npos);
  CHECK(off.to_json()["divergence"] == true);

  const auto late = run_attack("replay-m1-late", 2, cache_off());
  CHECK(late.verdict == Verdict::kPrevented);
  CHECK(late.reason == "stale-timestamp");
}

TEST_CASE("single-bit tampers are rejected by their receiver") {
  // Every bit on the toy curve; one bit per byte on P-256 to bound runtime.
  for (const CurveParams* c : {&toy_curve(), &p256()}) {
    SimConfig cfg;
    cfg.curve = c;
    const auto cases = tamper_sweep_parallel(21, cfg, c == &toy_curve());
    std::set<std::string> fields;
    for (const auto& tc : cases) {
      CAPTURE(tc.event);
      CAPTURE(tc.bit);
      CAPTURE(tc.field);
      CHECK(tc.prevented());
      fields.insert(tc.field);
    }
    for (const char* f : {"e1", "e3", "SP1", "SP2", "T2", "e5", "e6", "GP", "T3", "e7"}) CHECK(fields.contains(f));
  }
}

TEST_CASE("parallel tamper sweep equals the serial reference") {
  const auto s = tamper_sweep_serial(8, {});
  const auto p = tamper_sweep_parallel(8, {});
  REQUIRE(s.size() == p.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i].event == p[i].event);
    CHECK(s[i].bit == p[i].bit);
    CHECK(s[i].reason == p[i].reason);
    CHECK(s[i].prevented() == p[i].prevented());
  }
}

TEST_CASE("garbage probes: exact gateway and sensor costs") {
  Simulation sim({}, 6);
  const auto m1 = run_attack("dos-garbage-m1", 6);
  CHECK(m1.costs.gateway.same_priced({0, 1, 1}));
  CHECK(m1.reason == "decrypt-failed");
  const auto m2 = run_attack("dos-garbage-m2", 6);
  CHECK(m2.costs.sensor.ecc == 0);
  CHECK(m2.costs.sensor.h == 1);
  CHECK(m2.costs.sensor.xorops == 1);
  CHECK(m2.reason == "gateway-auth-failed");

  Bytes noise(50, 0xAB);
  const auto n = dos_probe(sim.gateway(), noise, kEpochMs, sim.rng());
  CHECK(n.ecc == 0);
  CHECK(n.sym == 0);
}

TEST_CASE("every rejected probe costs fewer EC mults than an honest leg") {
  Simulation sim({}, 12);
  const auto honest = measure_counts(sim.handshake());
  SeededRandom rng(13);
  for (int i = 0; i < 50; ++i) {
    Bytes junk(static_cast<std::size_t>(1 + i * 3));
    rng.fill(junk);
    junk[0] = static_cast<std::uint8_t>(i % 2 ? 0x01 : 0x02);
    CHECK(dos_probe(sim.gateway(), junk, sim.clock().now(), rng).ecc < honest.gateway.ecc);
    CHECK(dos_probe_sensor(sim.suite(), sim.gateway().config(), sim.sensor(), junk, sim.clock().now(), rng).ecc <
          honest.sensor.ecc);
  }
  for (const char* name : {"dos-garbage-m1", "wrong-sid-routing"}) {
    const auto out = run_attack(name, 12);
    CHECK(out.costs.gateway.ecc < honest.gateway.ecc);
  }
}

TEST_CASE("password change in the simulator updates the card only on confirmation") {
  Simulation sim({}, 14);
  const auto old_card = sim.card();
  const auto t = sim.password_change(to_bytes("fresh pw"));
  CHECK(t.steps.size() == 2);
  CHECK(t.steps[1].accepted);
  CHECK_FALSE(sim.card() == old_card);
  CHECK(sim.handshake().honest_complete());
}

TEST_CASE("no single-bit flip maps a toy point onto another toy point") {
  const auto& c = toy_curve();
  for (int k = 1; k < 19; ++k) {
    const auto pt = scalar_mult(Scalar(k, c), c.generator(), c);
    for (int bit = 0; bit < 8; ++bit) {
      const BigInt m = 1 << bit;
      const BigInt x = pt.x() ^ m, y = pt.y() ^ m;
      CHECK_FALSE(c.on_curve(GroupPoint(x, pt.y())));
      CHECK_FALSE(c.on_curve(GroupPoint(pt.x(), y)));
    }
  }
}

TEST_CASE("compromise cross-checks: stolen verifier and S + z") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto sv = stolen_verifier_impersonation(seed);
    CHECK(sv.gateway_accepted);
    CHECK(sv.sensor_completed);
    CHECK(sv.attacker_has_sk);
    CHECK(s_z_compromise(seed).recovered);
  }
}

TEST_CASE("parallel batch runner matches the serial reference") {
  std::vector<std::uint64_t> seeds(64);
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = 1000 + i;
  const auto serial = run_sessions_serial(seeds);
  const auto parallel = run_sessions_parallel(seeds);
  CHECK(serial == parallel);
  std::set<std::string> fps;
  for (const auto& s : serial) {
    CHECK(s.complete);
    fps.insert(s.key_fp);
  }
  CHECK(fps.size() > 1);
}
