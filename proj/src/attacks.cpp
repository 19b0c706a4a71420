#include "wsnake/attacks.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace wsnake::simnet {

using namespace protocol;

std::string_view verdict_name(Verdict v) { return v == Verdict::kPrevented ? "prevented" : "succeeded"; }

bool AttackOutcome::matches() const {
  return !divergent() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok; });
}

nlohmann::json AttackOutcome::to_json() const {
  nlohmann::json out{{"scenario", name},
                     {"claim", claim},
                     {"verdict", verdict_name(verdict)},
                     {"expected", verdict_name(expected)},
                     {"divergence", divergent()},
                     {"costs", costmodel::profile_json(costs)}};
  if (!reason.empty()) out["reason"] = reason;
  out["checks"] = nlohmann::json::array();
  for (const auto& c : checks) out["checks"].push_back({{"check", c.label}, {"ok", c.ok}});
  out["notes"] = notes;
  return out;
}

std::string AttackOutcome::to_text() const {
  std::ostringstream os;
  os << "scenario:  " << name << "\n"
     << "claim:     " << claim << "\n"
     << "verdict:   " << verdict_name(verdict) << " (expected " << verdict_name(expected) << ")\n";
  if (!reason.empty()) os << "reason:    " << reason << "\n";
  os << "cost:      user " << costmodel::formula(costs.user) << "; gateway " << costmodel::formula(costs.gateway)
     << "; sensor " << costmodel::formula(costs.sensor) << "\n";
  for (const auto& c : checks) os << "  [" << (c.ok ? "ok" : "FAIL") << "] " << c.label << "\n";
  for (const auto& n : notes) os << "  note: " << n << "\n";
  if (divergent()) {
    os << "DIVERGENCE: observed '" << verdict_name(verdict) << "' where the claim expects '"
       << verdict_name(expected) << "'\n";
  }
  return os.str();
}

namespace {

const Step* step_for(const Transcript& t, std::size_t event) {
  for (const auto& s : t.steps) {
    if (s.event == event) return &s;
  }
  return nullptr;
}

std::string reason_of(const Step* s) {
  if (!s) return "not delivered";
  if (!s->rejection) return {};
  return std::string(reason_name(s->rejection->reason));
}

bool keys_consistent(const Transcript& t) {
  std::set<Digest> keys;
  for (const auto& s : t.steps) {
    if (s.session_key) keys.insert(*s.session_key);
  }
  return keys.size() <= 1;
}

Bytes random_bytes(RandomSource& rng, std::size_t n) {
  Bytes b(n);
  rng.fill(b);
  return b;
}

GroupPoint adversary_point(Simulation& sim) {
  opcount::PauseScope pause;
  const auto& ec = sim.suite().ec();
  return scalar_mult(sim.rng().nonzero_scalar(ec), ec.generator(), ec);
}

AttackOutcome replay_m1(Simulation& sim, Millis replay_at, std::string name) {
  AttackOutcome out;
  out.name = std::move(name);
  out.claim = "resists replay of the login message";
  const auto t = sim.handshake({{Action::replay(0, replay_at)}});
  const Step* replayed = nullptr;
  for (const auto& s : t.steps) {
    if (t.events[s.event].adversary == "replay") replayed = &s;
  }
  out.costs = observed_counts(t);
  out.verdict = replayed && replayed->accepted ? Verdict::kSucceeded : Verdict::kPrevented;
  out.reason = reason_of(replayed);
  const auto user_keys = t.keys(Party::kUser);
  out.checks.push_back({"honest session completed before the replay", user_keys.size() == 1});
  out.checks.push_back({"replayed M1 was delivered", replayed != nullptr});
  out.notes.push_back("M1 replayed at +" + std::to_string(replay_at - sim.config().start) + " ms; window " +
                      std::to_string(sim.config().protocol.freshness_ms) + " ms; replay cache " +
                      (sim.config().protocol.replay_cache ? "on" : "off"));
  if (out.verdict == Verdict::kSucceeded) {
    out.notes.push_back("gateway accepted the duplicate M1 and the sensor completed a session no user requested (" +
                        std::to_string(t.keys(Party::kSensor).size()) + " sensor sessions)");
    out.notes.push_back("the replayer still cannot compute the session key; the effect is an unsolicited session");
  }
  return out;
}

AttackOutcome attack_replay_late(Simulation& sim) {
  const auto& cfg = sim.config();
  return replay_m1(sim, cfg.start + cfg.protocol.freshness_ms + 500, "replay-m1-late");
}

AttackOutcome attack_replay_fast(Simulation& sim) {
  const auto& cfg = sim.config();
  return replay_m1(sim, cfg.start + cfg.protocol.freshness_ms / 2, "replay-m1-fast");
}

AttackOutcome attack_tamper(std::uint64_t seed, const SimConfig& cfg) {
  AttackOutcome out;
  out.name = "tamper-any-bit";
  out.claim = "resists man-in-the-middle modification";
  const auto cases = tamper_sweep_parallel(seed, cfg);
  std::size_t prevented = 0;
  std::map<std::string, std::size_t> by_reason;
  for (const auto& c : cases) {
    if (c.prevented()) {
      ++prevented;
    } else {
      out.notes.push_back("M" + std::to_string(c.event + 1) + " bit " + std::to_string(c.bit) + " (" + c.field +
                          ") not prevented: receiver " + (c.receiver_rejected ? "rejected" : "accepted") +
                          (c.keys_consistent ? "" : ", parties hold different keys"));
    }
    ++by_reason[c.reason.empty() ? "accepted" : c.reason];
  }
  out.verdict = prevented == cases.size() ? Verdict::kPrevented : Verdict::kSucceeded;
  out.checks.push_back({"mutations tried: " + std::to_string(cases.size()), !cases.empty()});
  for (const auto& [reason, n] : by_reason) out.notes.push_back(reason + ": " + std::to_string(n));
  return out;
}

AttackOutcome attack_dos_m1(Simulation& sim) {
  AttackOutcome out;
  out.name = "dos-garbage-m1";
  out.claim = "garbage logins cost the gateway only e2 and one decryption";
  const M1 m1{adversary_point(sim), Ciphertext{kNonceUserToGateway, random_bytes(sim.rng(), 64)}};
  const auto t = sim.inject_only({{Action::inject(encode(m1, sim.suite().ec()), sim.clock().now(), Party::kGateway)}});
  out.costs = observed_counts(t);
  const Step* s = t.steps.empty() ? nullptr : &t.steps.front();
  out.verdict = s && s->accepted ? Verdict::kSucceeded : Verdict::kPrevented;
  out.reason = reason_of(s);
  const auto& g = out.costs.gateway;
  out.checks.push_back({"gateway spent exactly 1 EC mult", g.ecc == 1});
  out.checks.push_back({"gateway spent exactly 1 symmetric open", g.sym == 1});
  out.checks.push_back({"gateway spent no protocol hash", g.h == 0});
  const auto noise = dos_probe(sim.gateway(), random_bytes(sim.rng(), 97), sim.clock().now(), sim.rng());
  out.checks.push_back({"undecodable bytes cost 0 EC mult and 0 symmetric", noise.ecc == 0 && noise.sym == 0});
  return out;
}

AttackOutcome attack_dos_m2(Simulation& sim) {
  AttackOutcome out;
  out.name = "dos-garbage-m2";
  out.claim = "garbage sensor requests cost the sensor only e4 and one hash";
  const M2 m2{sim.rng().digest(), sim.rng().digest(), sim.clock().now(), adversary_point(sim)};
  const auto t = sim.inject_only({{Action::inject(encode(m2, sim.suite().ec()), sim.clock().now(), Party::kSensor)}});
  out.costs = observed_counts(t);
  const Step* s = t.steps.empty() ? nullptr : &t.steps.front();
  out.verdict = s && s->accepted ? Verdict::kSucceeded : Verdict::kPrevented;
  out.reason = reason_of(s);
  const auto& c = out.costs.sensor;
  out.checks.push_back({"sensor spent 0 EC mult", c.ecc == 0});
  out.checks.push_back({"sensor spent exactly 1 XOR and 1 hash", c.xorops == 1 && c.h == 1});
  return out;
}

AttackOutcome attack_insider(Simulation& sim) {
  AttackOutcome out;
  out.name = "insider-intercept-sp1";
  out.claim = "resists a privileged insider";
  // Alice plays the insider: she runs her own session and keeps its values.
  const auto own = sim.handshake();
  const auto& ctx = *sim.last_user_session();
  const auto m2 = std::get<M2>(decode(own.events.at(1).wire, sim.suite().ec()));
  Digest candidate_as;
  Digest e4_forged;
  {
    opcount::PauseScope pause;
    // SP1 ^ p2b(e2) = b ^ AS: the insider's best guess at AS.
    candidate_as = xor_bytes(m2.sp1, p2b(ctx.e2, sim.suite().ec(), sim.suite().hash_algo));
    e4_forged = sim.rng().digest();
  }
  const Millis now = sim.clock().now();
  M2 forged;
  {
    opcount::PauseScope pause;
    forged = M2{xor_bytes(e4_forged, candidate_as),
                sim.suite().h({e4_forged.view(), sim.sensor().sid, u64_be(now)}), now, adversary_point(sim)};
  }
  const auto t = sim.inject_only({{Action::inject(encode(forged, sim.suite().ec()), now, Party::kSensor)}});
  out.costs = observed_counts(t);
  const Step* s = t.steps.empty() ? nullptr : &t.steps.front();
  out.verdict = s && s->accepted ? Verdict::kSucceeded : Verdict::kPrevented;
  out.reason = reason_of(s);
  out.checks.push_back({"insider's own session completed", own.honest_complete()});
  out.checks.push_back({"b ^ AS differs from AS", candidate_as != sim.sensor().as});
  return out;
}

AttackOutcome attack_stolen_card(Simulation& sim) {
  AttackOutcome out;
  out.name = "stolen-card-no-password";
  out.claim = "resists a stolen smart card";
  const auto& real = sim.credentials();
  const std::vector<Credentials> guesses{
      {real.id, to_bytes("password"), real.bmp},
      {real.id, to_bytes("123456"), real.bmp},
      {real.id, real.pw, Digest::zero()},  // right password, no biometric
  };
  bool any_login = false;
  std::size_t sent = 0;
  for (const auto& g : guesses) {
    const auto t = sim.handshake_as(g, sim.card(), sim.sensor().sid);
    any_login = any_login || !t.login_rejection;
    sent += t.events.size();
    if (t.login_rejection) out.reason = std::string(reason_name(t.login_rejection->reason));
  }
  out.verdict = any_login ? Verdict::kSucceeded : Verdict::kPrevented;
  out.checks.push_back({"no message left the device", sent == 0});
  out.notes.push_back(std::to_string(guesses.size()) + " guesses tried against the card's D check");
  return out;
}

AttackOutcome attack_wrong_sid(Simulation& sim) {
  AttackOutcome out;
  out.name = "wrong-sid-routing";
  out.claim = "gateway routes only to registered sensors and users";
  const auto unknown_sid = sim.handshake_as(sim.credentials(), sim.card(), to_bytes("sensor-9"));
  const Step* s1 = step_for(unknown_sid, 0);

  M1 fabricated;
  {
    opcount::PauseScope pause;
    fabricated = user_auth_init(sim.suite(), sim.rng().digest(), sim.sensor().sid, sim.clock().now(),
                                sim.gateway().public_key(), sim.rng())
                     .first;
  }
  const auto t2 =
      sim.inject_only({{Action::inject(encode(fabricated, sim.suite().ec()), sim.clock().now(), Party::kGateway)}});
  const Step* s2 = t2.steps.empty() ? nullptr : &t2.steps.front();

  const bool accepted = (s1 && s1->accepted) || (s2 && s2->accepted);
  out.verdict = accepted ? Verdict::kSucceeded : Verdict::kPrevented;
  out.reason = reason_of(s1);
  out.costs = observed_counts(unknown_sid);
  out.checks.push_back({"unknown SID rejected as unknown-sensor",
                        s1 && s1->rejection && s1->rejection->reason == RejectReason::kUnknownSensor});
  out.checks.push_back({"fabricated B rejected as unknown-user",
                        s2 && s2->rejection && s2->rejection->reason == RejectReason::kUnknownUser});
  out.checks.push_back({"no M2 reached the sensor", unknown_sid.events.size() == 1 && t2.events.size() == 1});
  return out;
}

AttackOutcome attack_pc_lost(Simulation& sim) {
  AttackOutcome out;
  out.name = "pc-lost-confirmation";
  out.claim = "a lost password-change confirmation leaves the old credentials usable";
  const auto old_creds = sim.credentials();
  const auto old_card = sim.card();
  const auto pc = sim.password_change(to_bytes("new secret"), {{Action::drop(1)}});
  const auto after = sim.handshake();
  Credentials new_creds = old_creds;
  new_creds.pw = to_bytes("new secret");
  const auto with_new = sim.handshake_as(new_creds, sim.card(), sim.sensor().sid);

  out.verdict = after.honest_complete() ? Verdict::kPrevented : Verdict::kSucceeded;
  out.costs = observed_counts(pc);
  if (!after.honest_complete()) {
    for (const auto* r : after.rejections()) out.reason = std::string(reason_name(r->rejection->reason));
  }
  out.checks.push_back({"gateway accepted PC1", pc.steps.size() == 1 && pc.steps[0].accepted});
  out.checks.push_back({"PC2 was dropped", pc.events.size() == 2 && !pc.events[1].delivered});
  out.checks.push_back({"card unchanged", sim.card() == old_card && sim.credentials().pw == old_creds.pw});
  out.checks.push_back({"new password does not open the old card", with_new.login_rejection.has_value()});
  return out;
}

struct Entry {
  std::string_view summary;
  std::function<AttackOutcome(std::uint64_t, const SimConfig&)> run;
};

template <AttackOutcome (*F)(Simulation&)>
AttackOutcome in_world(std::uint64_t seed, const SimConfig& cfg) {
  Simulation sim(cfg, seed);
  return F(sim);
}

const std::vector<std::pair<std::string, Entry>>& catalog() {
  static const std::vector<std::pair<std::string, Entry>> c{
      {"replay-m1-late", {"M1 replayed after the freshness window", in_world<attack_replay_late>}},
      {"replay-m1-fast", {"identical M1 replayed inside the freshness window", in_world<attack_replay_fast>}},
      {"tamper-any-bit", {"every single-bit flip of every M1..M4 byte", attack_tamper}},
      {"dos-garbage-m1", {"well-formed M1 with garbage e3", in_world<attack_dos_m1>}},
      {"dos-garbage-m2", {"well-formed M2 with garbage SP1/SP2", in_world<attack_dos_m2>}},
      {"insider-intercept-sp1", {"registered user strips p2b(e2) from SP1 and forges M2", in_world<attack_insider>}},
      {"stolen-card-no-password", {"card holder without the password", in_world<attack_stolen_card>}},
      {"wrong-sid-routing", {"unregistered SID, and M1 with a fabricated B", in_world<attack_wrong_sid>}},
      {"pc-lost-confirmation", {"password-change confirmation dropped", in_world<attack_pc_lost>}},
  };
  return c;
}

const Entry& lookup(std::string_view name) {
  for (const auto& [n, e] : catalog()) {
    if (n == name) return e;
  }
  std::string msg = "unknown attack scenario '" + std::string(name) + "'; known:";
  for (const auto& [n, e] : catalog()) msg += " " + n;
  throw std::invalid_argument(msg);
}

// Labels every byte of an encoded message with the field it belongs to.
std::vector<std::string> byte_fields(const Bytes& wire, const CurveParams& curve) {
  std::vector<std::string> out{"type"};
  for (const auto& f : fields_of(decode(wire, curve), curve)) {
    out.insert(out.end(), 2, "framing");
    out.insert(out.end(), f.bytes.size(), std::string(f.name));
  }
  if (out.size() != wire.size()) throw std::logic_error("field map does not cover the message");
  return out;
}

TamperCase run_tamper_case(std::uint64_t seed, const SimConfig& cfg, std::size_t event, std::size_t bit,
                           std::string field) {
  Simulation sim(cfg, seed);
  const auto t = sim.handshake({{Action::mutate(event, bit / 8, static_cast<std::uint8_t>(1u << (bit % 8)))}});
  TamperCase c;
  c.event = event;
  c.bit = bit;
  c.field = std::move(field);
  const Step* s = step_for(t, event);
  c.receiver_rejected = s && !s->accepted;
  c.reason = reason_of(s);
  c.keys_consistent = keys_consistent(t);
  return c;
}

struct TamperPlan {
  std::vector<std::tuple<std::size_t, std::size_t, std::string>> cases;
};

TamperPlan tamper_plan(std::uint64_t seed, const SimConfig& cfg, bool every_bit) {
  Simulation sim(cfg, seed);
  const auto honest = sim.handshake();
  if (!honest.honest_complete()) throw std::logic_error("honest prefix did not complete");
  TamperPlan plan;
  for (std::size_t e = 0; e < 4; ++e) {
    const auto fields = byte_fields(honest.events[e].wire, sim.suite().ec());
    for (std::size_t bit = 0; bit < fields.size() * 8; ++bit) {
      if (every_bit || bit % 8 == (bit / 8) % 8) plan.cases.emplace_back(e, bit, fields[bit / 8]);
    }
  }
  return plan;
}

}  // namespace

const std::vector<std::string>& attack_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, e] : catalog()) n.push_back(name);
    return n;
  }();
  return names;
}

std::string_view attack_summary(std::string_view name) { return lookup(name).summary; }

AttackOutcome run_attack(std::string_view name, std::uint64_t seed, const SimConfig& cfg) {
  auto out = lookup(name).run(seed, cfg);
  if (name == "replay-m1-fast" && !cfg.protocol.replay_cache) {
    out.notes.push_back("replay cache disabled: only the timestamp window guards against replay");
  }
  return out;
}

std::vector<TamperCase> tamper_sweep_serial(std::uint64_t seed, const SimConfig& cfg, bool every_bit) {
  const auto plan = tamper_plan(seed, cfg, every_bit);
  std::vector<TamperCase> out;
  out.reserve(plan.cases.size());
  for (const auto& [e, bit, field] : plan.cases) out.push_back(run_tamper_case(seed, cfg, e, bit, field));
  return out;
}

std::vector<TamperCase> tamper_sweep_parallel(std::uint64_t seed, const SimConfig& cfg, bool every_bit) {
  const auto plan = tamper_plan(seed, cfg, every_bit);
  std::vector<TamperCase> out(plan.cases.size());
  const auto n = static_cast<std::ptrdiff_t>(plan.cases.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& [e, bit, field] = plan.cases[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = run_tamper_case(seed, cfg, e, bit, field);
  }
  return out;
}

StolenVerifierResult stolen_verifier_impersonation(std::uint64_t seed, const SimConfig& cfg) {
  Simulation sim(cfg, seed);
  const auto* rec = sim.gateway().find_by_id(sim.credentials().id);
  if (!rec) throw std::logic_error("alice is not registered");
  const Digest b = rec->b, z = rec->z;

  UserSession ctx;
  M1 m1;
  {
    opcount::PauseScope pause;
    std::tie(m1, ctx) =
        user_auth_init(sim.suite(), b, sim.sensor().sid, sim.clock().now(), sim.gateway().public_key(), sim.rng());
  }
  StolenVerifierResult r;
  r.transcript =
      sim.inject_only({{Action::inject(encode(m1, sim.suite().ec()), sim.clock().now(), Party::kGateway)}});
  const auto& t = r.transcript;
  r.gateway_accepted = !t.steps.empty() && t.steps.front().accepted;
  const auto sensor_keys = t.keys(Party::kSensor);
  r.sensor_completed = sensor_keys.size() == 1;

  for (const auto& e : t.events) {
    if (e.to != Party::kUser) continue;
    opcount::PauseScope pause;
    // The attacker reads e7 off the wire and opens it with its own session key.
    SmartCard stub{};
    stub.z = z;
    const auto sk = user_on_m4(sim.suite(), sim.gateway().config(), stub, ctx,
                               std::get<M4>(decode(e.wire, sim.suite().ec())), e.send_time);
    r.attacker_has_sk = sk.ok() && r.sensor_completed && sk.value() == sensor_keys.front();
  }
  return r;
}

TranscriptDecryptResult s_z_compromise(std::uint64_t seed, const SimConfig& cfg) {
  Simulation sim(cfg, seed);
  TranscriptDecryptResult r;
  r.transcript = sim.handshake();
  const auto& t = r.transcript;
  if (!t.honest_complete()) return r;
  const auto& suite = sim.suite();
  const auto& ec = suite.ec();
  const Scalar& s = sim.gateway().secret();
  const Digest z = sim.gateway().find_by_id(sim.credentials().id)->z;

  opcount::PauseScope pause;
  const auto m1 = std::get<M1>(decode(t.events.at(0).wire, ec));
  const auto m4 = std::get<M4>(decode(t.events.at(3).wire, ec));
  const auto key = kdf_key(scalar_mult(s, m1.e1, ec), ec, suite.hash_algo);
  try {
    const Bytes plain = ae_open(key, m4.e7);
    Reader rd(plain);
    (void)rd.lp();  // B
    const auto sku = rd.lp_digest();
    r.recovered = xor_bytes(sku, z) == t.keys(Party::kSensor).front();
  } catch (const AuthError&) {
  } catch (const CodecError&) {
  }
  return r;
}

}  // namespace wsnake::simnet
