// Command-line front end: gateway database management, single handshakes,
// the attack catalog, symbolic analysis and the cost report.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "wsnake/attacks.hpp"
#include "wsnake/costmodel.hpp"
#include "wsnake/protocol.hpp"
#include "wsnake/secrecy.hpp"
#include "wsnake/simnet.hpp"
#include "wsnake/storage.hpp"

namespace fs = std::filesystem;
using namespace wsnake;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitDivergence = 2;

struct Options {
  std::optional<std::string> curve;
  protocol::Millis freshness_ms = protocol::kDefaultFreshnessMs;
  std::string replay_cache = "on";
  std::optional<std::uint64_t> seed;
  std::string db;
  std::string format = "text";
  std::optional<protocol::Millis> now_ms;
  std::string th, tecc, tsym;

  std::string id, password, new_password, biometric, card, sid, sensor_file;
  bool provision = false;
  std::string scenario;
  int max_rounds = dolevyao::Limits{}.max_rounds;
  std::size_t max_size = dolevyao::Limits{}.max_size;

  bool json() const { return format == "json"; }
  protocol::Config protocol_config() const {
    protocol::Config c;
    c.freshness_ms = freshness_ms;
    c.replay_cache = replay_cache == "on";
    return c;
  }
  simnet::SimConfig sim_config(std::string_view default_curve) const {
    simnet::SimConfig c;
    c.curve = &curve_by_name(curve.value_or(std::string(default_curve)));
    c.protocol = protocol_config();
    return c;
  }
  protocol::Millis now() const { return now_ms.value_or(simnet::kEpochMs); }
  std::unique_ptr<RandomSource> rng() const {
    if (seed) return std::make_unique<SeededRandom>(*seed);
    return std::make_unique<SystemRandom>();
  }
};

void emit(const Options& o, const json& j, const std::string& text) {
  if (o.json()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << text;
  }
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

protocol::GatewayState load_gateway(const Options& o) {
  auto gw = storage::parse_gateway(storage::read_file(o.db), o.protocol_config());
  if (o.curve && curve_by_name(*o.curve).id() != gw.suite().ec().id()) {
    throw std::invalid_argument("database uses curve " + gw.suite().ec().id() + ", not " + *o.curve);
  }
  return gw;
}

void save_gateway(const Options& o, const protocol::GatewayState& gw) {
  storage::write_file(o.db, storage::serialize_gateway(gw));
}

void require_db(const Options& o) {
  if (o.db.empty()) throw std::invalid_argument("--db is required");
}

protocol::Credentials credentials(const protocol::Suite& suite, const Options& o, const std::string& pw) {
  protocol::Credentials c;
  c.id = to_bytes(o.id);
  c.pw = to_bytes(pw);
  if (!o.biometric.empty()) c.bmp = suite.h({to_bytes("bmp"), to_bytes(o.biometric)});
  return c;
}

int cmd_register_user(const Options& o) {
  require_db(o);
  storage::FileLock lock(o.db);
  auto rng = o.rng();
  const bool fresh_db = !fs::exists(o.db);
  auto gw = fresh_db ? protocol::GatewayState::generate(
                           protocol::Suite{&curve_by_name(o.curve.value_or("p256")), HashAlgorithm::kSha256},
                           *rng, o.protocol_config())
                     : load_gateway(o);
  const auto card = protocol::register_user(gw, credentials(gw.suite(), o, o.password), *rng);
  storage::write_file(o.card, storage::serialize_card(card));
  save_gateway(o, gw);
  json j{{"command", "register-user"},
         {"user", o.id},
         {"curve", gw.suite().ec().id()},
         {"database_created", fresh_db},
         {"card_file", o.card},
         {"card_fingerprint", simnet::fingerprint(card.c)}};
  std::ostringstream os;
  if (fresh_db) os << "created gateway database " << o.db << " (curve " << gw.suite().ec().id() << ")\n";
  os << "registered user " << o.id << "; card written to " << o.card << " (fingerprint "
     << simnet::fingerprint(card.c) << ")\n";
  emit(o, j, os.str());
  return kExitOk;
}

int cmd_register_sensor(const Options& o) {
  require_db(o);
  storage::FileLock lock(o.db);
  auto gw = load_gateway(o);
  json j{{"command", "register-sensor"}, {"sid", o.sid}};
  std::ostringstream os;
  if (o.provision) {
    gw.provision_sensor(to_bytes(o.sid));
    save_gateway(o, gw);
    j["provisioned"] = true;
    os << "provisioned sensor " << o.sid << "\n";
  } else {
    const auto sensor = protocol::register_sensor(gw, to_bytes(o.sid));
    save_gateway(o, gw);
    if (!o.sensor_file.empty()) storage::write_file(o.sensor_file, storage::serialize_sensor(sensor));
    j["registered"] = true;
    j["as_fingerprint"] = simnet::fingerprint(sensor.as);
    os << "registered sensor " << o.sid << " (AS fingerprint " << simnet::fingerprint(sensor.as) << ")";
    if (!o.sensor_file.empty()) {
      j["sensor_file"] = o.sensor_file;
      os << "; key written to " << o.sensor_file;
    }
    os << "\n";
  }
  emit(o, j, os.str());
  return kExitOk;
}

struct HopLog {
  json steps = json::array();
  std::ostringstream text;

  void record(const std::string& msg, const std::string& from, const std::string& to,
              const std::optional<Rejection>& rej) {
    json s{{"message", msg}, {"from", from}, {"to", to}, {"accepted", !rej}};
    text << msg << " " << from << " -> " << to << ": ";
    if (rej) {
      s["reason"] = reason_name(rej->reason);
      text << "rejected (" << reason_name(rej->reason) << ")\n";
    } else {
      text << "accepted\n";
    }
    steps.push_back(std::move(s));
  }
};

template <class T>
std::optional<Rejection> rejection_of(const Result<T>& r) {
  if (r.ok()) return std::nullopt;
  return r.error();
}

int handshake_simulated(const Options& o) {
  const auto cfg = o.sim_config("toy");
  const auto t = simnet::run_session(o.seed.value_or(1), cfg);
  auto j = t.to_json(*cfg.curve);
  j["command"] = "handshake";
  j["seed"] = o.seed.value_or(1);
  j["agreed"] = t.honest_complete();
  std::ostringstream os;
  os << "simulated handshake alice -> sensor-1 (curve " << t.curve_id << ", seed " << o.seed.value_or(1) << ")\n";
  for (const auto& s : t.steps) {
    os << s.message << " at " << simnet::party_name(s.party) << ": "
       << (s.accepted ? "accepted" : "rejected (" + std::string(reason_name(s.rejection->reason)) + ")") << "\n";
  }
  for (const auto p : {simnet::Party::kUser, simnet::Party::kGateway, simnet::Party::kSensor}) {
    const auto keys = t.keys(p);
    os << "key fingerprint " << simnet::party_name(p) << ": "
       << (keys.empty() ? std::string("none") : simnet::fingerprint(keys.front())) << "\n";
  }
  const auto ops = simnet::observed_counts(t);
  os << "ops: user " << costmodel::formula(ops.user) << "; gateway " << costmodel::formula(ops.gateway)
     << "; sensor " << costmodel::formula(ops.sensor) << "\n"
     << "agreed: " << yes_no(t.honest_complete()) << "\n";
  emit(o, j, os.str());
  return t.honest_complete() ? kExitOk : kExitError;
}

int cmd_handshake(const Options& o) {
  if (o.db.empty()) return handshake_simulated(o);
  storage::FileLock lock(o.db);
  auto gw = load_gateway(o);
  const auto& suite = gw.suite();
  const auto cfg = gw.config();
  auto rng = o.rng();
  const auto card = storage::parse_card(storage::read_file(o.card));
  const auto sid = to_bytes(o.sid);
  protocol::SensorState sensor;
  if (!o.sensor_file.empty()) {
    sensor = storage::parse_sensor(storage::read_file(o.sensor_file));
    if (sensor.sid != sid) throw std::invalid_argument("sensor file holds a different SID");
  } else if (const auto as = gw.sensor_as(sid)) {
    sensor = {sid, *as};
  } else {
    throw std::invalid_argument("sensor " + o.sid + " is not registered; pass --sensor-file or register it");
  }

  std::array<opcount::OpCounts, 3> ops{};
  HopLog log;
  std::optional<Digest> sk_user, sk_gw, sk_sensor;
  const auto t0 = o.now();
  constexpr protocol::Millis hop = 5;

  auto finish = [&](int code) {
    save_gateway(o, gw);
    costmodel::CostProfile p{costmodel::RoleCounts::from(ops[0]), costmodel::RoleCounts::from(ops[1]),
                             costmodel::RoleCounts::from(ops[2])};
    const bool agreed = sk_user && sk_gw && sk_sensor && *sk_user == *sk_gw && *sk_gw == *sk_sensor;
    json j{{"command", "handshake"}, {"user", o.id},  {"sid", o.sid},
           {"curve", suite.ec().id()}, {"steps", log.steps}, {"agreed", agreed},
           {"ops", costmodel::profile_json(p)}};
    auto fp = [](const std::optional<Digest>& d) { return d ? simnet::fingerprint(*d) : std::string("none"); };
    j["sk_fingerprints"] = {{"user", fp(sk_user)}, {"gateway", fp(sk_gw)}, {"sensor", fp(sk_sensor)}};
    std::ostringstream os;
    os << "handshake " << o.id << " -> " << o.sid << " (curve " << suite.ec().id() << ")\n"
       << log.text.str() << "key fingerprint user: " << fp(sk_user) << "\n"
       << "key fingerprint gateway: " << fp(sk_gw) << "\n"
       << "key fingerprint sensor: " << fp(sk_sensor) << "\n"
       << "ops: user " << costmodel::formula(p.user) << "; gateway " << costmodel::formula(p.gateway)
       << "; sensor " << costmodel::formula(p.sensor) << "\n"
       << "agreed: " << yes_no(agreed) << "\n";
    emit(o, j, os.str());
    return agreed ? code : kExitError;
  };

  std::optional<std::pair<protocol::M1, protocol::UserSession>> init;
  {
    opcount::CountingScope scope(ops[0]);
    const auto creds = credentials(suite, o, o.password);
    auto login = protocol::user_login(suite, card, creds);
    if (!login) {
      log.record("login", "user", "card", login.error());
      return finish(kExitError);
    }
    init = protocol::user_auth_init(suite, login.value(), sid, t0, gw.public_key(), *rng);
  }
  std::optional<std::pair<protocol::M2, protocol::GatewaySession>> g1;
  {
    opcount::CountingScope scope(ops[1]);
    auto r = protocol::gw_on_m1(gw, init->first, t0 + hop, *rng);
    log.record("M1", "user", "gateway", rejection_of(r));
    if (!r) return finish(kExitError);
    g1 = std::move(r).value();
  }
  std::optional<std::pair<protocol::M3, Digest>> s1;
  {
    opcount::CountingScope scope(ops[2]);
    auto r = protocol::sensor_on_m2(suite, cfg, sensor, g1->first, t0 + 2 * hop, *rng);
    log.record("M2", "gateway", "sensor", rejection_of(r));
    if (!r) return finish(kExitError);
    s1 = std::move(r).value();
    sk_sensor = s1->second;
  }
  std::optional<std::pair<protocol::M4, Digest>> g2;
  {
    opcount::CountingScope scope(ops[1]);
    auto r = protocol::gw_on_m3(gw, g1->second, s1->first, t0 + 3 * hop);
    log.record("M3", "sensor", "gateway", rejection_of(r));
    if (!r) return finish(kExitError);
    g2 = std::move(r).value();
    sk_gw = g2->second;
  }
  {
    opcount::CountingScope scope(ops[0]);
    auto r = protocol::user_on_m4(suite, cfg, card, init->second, g2->first, t0 + 4 * hop);
    log.record("M4", "gateway", "user", rejection_of(r));
    if (!r) return finish(kExitError);
    sk_user = r.value();
  }
  return finish(kExitOk);
}

int cmd_change_password(const Options& o) {
  require_db(o);
  storage::FileLock lock(o.db);
  auto gw = load_gateway(o);
  const auto& suite = gw.suite();
  auto rng = o.rng();
  const auto card = storage::parse_card(storage::read_file(o.card));
  const auto t0 = o.now();
  json j{{"command", "change-password"}, {"user", o.id}};
  auto fail = [&](const std::string& stage, const Rejection& r) {
    j["changed"] = false;
    j["stage"] = stage;
    j["reason"] = reason_name(r.reason);
    emit(o, j, "password change for " + o.id + " rejected at " + stage + " (" + std::string(reason_name(r.reason)) +
                   ")\n");
    return kExitError;
  };
  auto req = protocol::user_pc_request(suite, card, credentials(suite, o, o.password), to_bytes(o.new_password), t0,
                                       gw.public_key(), *rng);
  if (!req) return fail("login", req.error());
  auto pc2 = protocol::gw_on_pc(gw, req.value().first, t0 + 5);
  if (!pc2) return fail("gateway", pc2.error());
  auto updated = protocol::user_pc_confirm(suite, gw.config(), card, req.value().second, pc2.value(), t0 + 10);
  if (!updated) return fail("confirmation", updated.error());
  save_gateway(o, gw);
  storage::write_file(o.card, storage::serialize_card(updated.value()));
  j["changed"] = true;
  j["card_fingerprint"] = simnet::fingerprint(updated.value().d);
  emit(o, j, "password changed for " + o.id + "; card " + o.card + " updated (fingerprint " +
                 simnet::fingerprint(updated.value().d) + ")\n");
  return kExitOk;
}

int cmd_attack(const Options& o) {
  const auto out = simnet::run_attack(o.scenario, o.seed.value_or(1), o.sim_config("toy"));
  emit(o, out.to_json(), out.to_text());
  return out.matches() ? kExitOk : kExitDivergence;
}

int cmd_analyze(const Options& o) {
  const auto report = dolevyao::run_secrecy_scenario(o.scenario, {o.max_rounds, o.max_size});
  auto j = report.to_json();
  auto text = report.to_text();
  const auto cfg = o.sim_config("toy");
  const auto seed = o.seed.value_or(1);
  if (o.scenario == "stolen-verifier") {
    const auto c = simnet::stolen_verifier_impersonation(seed, cfg);
    j["concrete"] = {{"gateway_accepted", c.gateway_accepted},
                     {"sensor_completed", c.sensor_completed},
                     {"attacker_has_sk", c.attacker_has_sk}};
    text += "concrete run (seed " + std::to_string(seed) + "): gateway accepted forged M1: " +
            yes_no(c.gateway_accepted) + "; sensor completed: " + yes_no(c.sensor_completed) +
            "; attacker holds the sensor's key: " + yes_no(c.attacker_has_sk) + "\n";
  } else if (o.scenario == "s-z-compromise") {
    const auto c = simnet::s_z_compromise(seed, cfg);
    j["concrete"] = {{"recovered", c.recovered}};
    text += "concrete run (seed " + std::to_string(seed) + "): key recovered from transcript: " +
            yes_no(c.recovered) + "\n";
  }
  emit(o, j, text);
  return report.divergent() ? kExitDivergence : kExitOk;
}

int cmd_cost_report(const Options& o) {
  auto units = costmodel::UnitCosts::reference();
  if (!o.th.empty()) units.t_h = costmodel::Seconds::parse(o.th);
  if (!o.tecc.empty()) units.t_ecc = costmodel::Seconds::parse(o.tecc);
  if (!o.tsym.empty()) units.t_sym = costmodel::Seconds::parse(o.tsym);
  units.validate();
  auto schemes = costmodel::reference_schemes();
  const auto cfg = o.sim_config("toy");
  const auto measured = simnet::measure_counts(simnet::run_session(o.seed.value_or(1), cfg));
  const auto claimed = costmodel::proposed_scheme_counts();
  auto priced_equal = [](const costmodel::RoleCounts& a, const costmodel::RoleCounts& b) {
    return a.h == b.h && a.ecc == b.ecc && a.sym == b.sym;
  };
  const bool agrees = priced_equal(measured.user, claimed.user) && priced_equal(measured.gateway, claimed.gateway) &&
                      priced_equal(measured.sensor, claimed.sensor);
  schemes.push_back({"measured", measured});
  const auto rows = costmodel::render_table(schemes, units);
  auto j = costmodel::table_json(rows, units);
  j["measured_matches_claimed"] = agrees;
  std::string text = costmodel::table_text(rows);
  text += "units: T_h " + units.t_h.str_exact() + " s, T_ecc " + units.t_ecc.str_exact() + " s, T_sym " +
          units.t_sym.str_exact() + " s\n";
  text += "measured counts (" + cfg.curve->id() + "): " + (agrees ? "agree with" : "DIVERGENCE from") +
          " the claimed row\n";
  emit(o, j, text);
  return agrees ? kExitOk : kExitDivergence;
}

int cmd_list(const Options& o) {
  json j{{"attacks", json::array()}, {"analyses", json::array()}};
  std::ostringstream os;
  os << "attacks:\n";
  for (const auto& n : simnet::attack_names()) {
    j["attacks"].push_back({{"name", n}, {"summary", simnet::attack_summary(n)}});
    os << "  " << n << "  " << simnet::attack_summary(n) << "\n";
  }
  os << "analyses:\n";
  for (const auto& n : dolevyao::scenario_names()) {
    const auto s = dolevyao::make_scenario(n);
    j["analyses"].push_back({{"name", n}, {"summary", s.summary}});
    os << "  " << n << "  " << s.summary << "\n";
  }
  emit(o, j, os.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-party authenticated key agreement: tooling and analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--curve", o.curve, "toy or p256")->check(CLI::IsMember({"toy", "p256"}));
  app.add_option("--freshness-ms", o.freshness_ms, "timestamp window")->check(CLI::PositiveNumber);
  app.add_option("--replay-cache", o.replay_cache, "on or off")->check(CLI::IsMember({"on", "off"}));
  app.add_option("--seed", o.seed, "deterministic randomness");
  app.add_option("--db", o.db, "gateway database file");
  app.add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--now-ms", o.now_ms, "clock reading for protocol timestamps");
  app.add_option("--th", o.th, "seconds per hash");
  app.add_option("--tecc", o.tecc, "seconds per EC multiplication");
  app.add_option("--tsym", o.tsym, "seconds per symmetric operation");

  auto* reg_user = app.add_subcommand("register-user", "register a user; creates the database if missing");
  reg_user->add_option("--id", o.id)->required();
  reg_user->add_option("--password", o.password)->required();
  reg_user->add_option("--biometric", o.biometric, "biometric template text");
  reg_user->add_option("--card", o.card, "smart-card output file")->required();

  auto* reg_sensor = app.add_subcommand("register-sensor", "provision or register a sensor");
  reg_sensor->add_option("--sid", o.sid)->required();
  reg_sensor->add_flag("--provision", o.provision, "only add the SID to the provisioning list");
  reg_sensor->add_option("--sensor-file", o.sensor_file, "sensor key output file");

  auto* hs = app.add_subcommand("handshake", "run one authenticated key agreement");
  hs->add_option("--id", o.id);
  hs->add_option("--password", o.password);
  hs->add_option("--biometric", o.biometric);
  hs->add_option("--card", o.card);
  hs->add_option("--sid", o.sid);
  hs->add_option("--sensor-file", o.sensor_file, "sensor key file (default: the gateway's record)");

  auto* pc = app.add_subcommand("change-password", "change a user's password");
  pc->add_option("--id", o.id)->required();
  pc->add_option("--password", o.password)->required();
  pc->add_option("--new-password", o.new_password)->required();
  pc->add_option("--biometric", o.biometric);
  pc->add_option("--card", o.card)->required();

  auto* attack = app.add_subcommand("attack", "run a scenario from the attack catalog");
  attack->add_option("name", o.scenario)->required();

  auto* analyze = app.add_subcommand("analyze", "symbolic secrecy analysis");
  analyze->add_option("name", o.scenario)->required();
  analyze->add_option("--max-rounds", o.max_rounds)->check(CLI::PositiveNumber);
  analyze->add_option("--max-size", o.max_size)->check(CLI::PositiveNumber);

  auto* cost = app.add_subcommand("cost-report", "computation cost comparison");
  auto* list = app.add_subcommand("list-scenarios", "list attacks and analyses");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*reg_user) return cmd_register_user(o);
    if (*reg_sensor) return cmd_register_sensor(o);
    if (*hs) {
      if (!o.db.empty() && (o.id.empty() || o.password.empty() || o.card.empty() || o.sid.empty())) {
        throw std::invalid_argument("handshake with --db needs --id, --password, --card and --sid");
      }
      return cmd_handshake(o);
    }
    if (*pc) return cmd_change_password(o);
    if (*attack) return cmd_attack(o);
    if (*analyze) return cmd_analyze(o);
    if (*cost) return cmd_cost_report(o);
    if (*list) return cmd_list(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
