#include "wsnake/simnet.hpp"

#include <map>
#include <queue>
#include <stdexcept>

namespace wsnake::simnet {

using namespace protocol;

std::string_view party_name(Party p) {
  switch (p) {
    case Party::kUser: return "user";
    case Party::kGateway: return "gateway";
    case Party::kSensor: return "sensor";
    case Party::kAdversary: return "adversary";
  }
  return "?";
}

Millis SimClock::local(Party p) const {
  if (p == Party::kAdversary) return now_;
  const auto skew = skew_[static_cast<std::size_t>(p)];
  if (skew < 0 && static_cast<Millis>(-skew) > now_) throw std::logic_error("clock skew underflows");
  return now_ + static_cast<Millis>(skew);
}

void SimClock::advance_to(Millis t) {
  if (t < now_) throw std::logic_error("simulated clock cannot move backwards");
  now_ = t;
}

std::string fingerprint(const Digest& d) {
  opcount::PauseScope pause;
  return hash(frame({to_bytes("fp"), d.view()})).hex().substr(0, 16);
}

// ---------------------------------------------------------------------------
// Transcript

std::vector<Digest> Transcript::keys(Party p) const {
  std::vector<Digest> out;
  for (const auto& s : steps) {
    if (s.party == p && s.session_key) out.push_back(*s.session_key);
  }
  return out;
}

std::vector<const Step*> Transcript::rejections() const {
  std::vector<const Step*> out;
  for (const auto& s : steps) {
    if (!s.accepted) out.push_back(&s);
  }
  return out;
}

bool Transcript::honest_complete() const {
  if (login_rejection || steps.size() != 4) return false;
  static constexpr std::array<std::pair<Party, std::string_view>, 4> kChain{
      {{Party::kGateway, "M1"}, {Party::kSensor, "M2"}, {Party::kGateway, "M3"}, {Party::kUser, "M4"}}};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!steps[i].accepted || steps[i].party != kChain[i].first || steps[i].message != kChain[i].second) return false;
  }
  for (const auto& e : events) {
    if (e.from == Party::kAdversary || e.adversary != "pass") return false;
  }
  const auto u = keys(Party::kUser), g = keys(Party::kGateway), s = keys(Party::kSensor);
  return u.size() == 1 && g.size() == 1 && s.size() == 1 && u[0] == g[0] && g[0] == s[0];
}

nlohmann::json Transcript::to_json(const CurveParams& curve) const {
  nlohmann::json out;
  out["curve"] = curve_id;
  out["hash"] = hash_id;
  out["events"] = nlohmann::json::array();
  for (const auto& e : events) {
    nlohmann::json ev{{"index", e.index},
                      {"from", party_name(e.from)},
                      {"to", party_name(e.to)},
                      {"send_ms", e.send_time},
                      {"adversary", e.adversary},
                      {"delivered", e.delivered},
                      {"bytes", e.wire.size()}};
    if (e.delivered) ev["deliver_ms"] = e.deliver_time;
    try {
      const auto msg = decode(e.wire, curve);
      ev["type"] = type_name(type_of(msg));
      nlohmann::json fields = nlohmann::json::object();
      for (const auto& f : fields_of(msg, curve)) fields[std::string(f.name)] = to_hex(f.bytes);
      ev["fields"] = std::move(fields);
    } catch (const std::invalid_argument&) {
      ev["type"] = "?";
    } catch (const CodecError&) {
      ev["type"] = "?";
    }
    out["events"].push_back(std::move(ev));
  }
  out["steps"] = nlohmann::json::array();
  for (const auto& s : steps) {
    nlohmann::json st{{"event", s.event}, {"party", party_name(s.party)}, {"message", s.message},
                      {"accepted", s.accepted}};
    if (s.rejection) {
      st["reason"] = reason_name(s.rejection->reason);
      st["detail"] = s.rejection->detail;
    }
    if (s.session_key) st["sk_fingerprint"] = fingerprint(*s.session_key);
    out["steps"].push_back(std::move(st));
  }
  if (login_rejection) out["login"] = reason_name(login_rejection->reason);
  out["ops"] = costmodel::profile_json(observed_counts(*this));
  return out;
}

costmodel::CostProfile observed_counts(const Transcript& t) {
  return {costmodel::RoleCounts::from(t.ops[0]), costmodel::RoleCounts::from(t.ops[1]),
          costmodel::RoleCounts::from(t.ops[2])};
}

costmodel::CostProfile measure_counts(const Transcript& t) {
  if (!t.honest_complete()) throw std::invalid_argument("transcript is not one honest, complete handshake");
  return observed_counts(t);
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

GatewayState make_gateway(const Suite& suite, RandomSource& rng, const Config& cfg) {
  opcount::PauseScope pause;
  return GatewayState::generate(suite, rng, cfg);
}

struct Pending {
  Millis at;
  std::uint64_t seq;
  std::size_t event;
  bool operator>(const Pending& o) const { return std::tie(at, seq) > std::tie(o.at, o.seq); }
};

}  // namespace

struct Simulation::Initiator {
  Credentials creds;
  SmartCard card;
  Bytes sid;
  std::optional<Bytes> new_pw;  // set for a password change
  bool is_alice = false;
};

Simulation::Simulation(SimConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      suite_{cfg.curve, cfg.hash_algo},
      rng_(seed),
      clock_(cfg.start, cfg.skew),
      gw_(make_gateway(suite_, rng_, cfg.protocol)) {
  opcount::PauseScope pause;
  creds_ = Credentials{to_bytes("alice"), to_bytes("correct horse"), rng_.digest()};
  card_ = register_user(gw_, creds_, rng_);
  const Bytes sid = to_bytes("sensor-1");
  gw_.provision_sensor(sid);
  sensor_ = register_sensor(gw_, sid);
}

SmartCard Simulation::enroll(const Credentials& creds) {
  opcount::PauseScope pause;
  return register_user(gw_, creds, rng_);
}

Transcript Simulation::handshake(const AdversaryScript& script) {
  return execute(Initiator{creds_, card_, sensor_.sid, std::nullopt, true}, script);
}

Transcript Simulation::handshake_as(const Credentials& creds, const SmartCard& card, ByteView sid,
                                    const AdversaryScript& script) {
  return execute(Initiator{creds, card, Bytes(sid.begin(), sid.end()), std::nullopt, false}, script);
}

Transcript Simulation::password_change(ByteView new_pw, const AdversaryScript& script) {
  return execute(Initiator{creds_, card_, sensor_.sid, Bytes(new_pw.begin(), new_pw.end()), true}, script);
}

Transcript Simulation::inject_only(const AdversaryScript& script) { return execute(std::nullopt, script); }

Transcript Simulation::execute(const std::optional<Initiator>& init, const AdversaryScript& script) {
  Transcript tr;
  tr.curve_id = suite_.ec().id();
  tr.hash_id = hash_name(suite_.hash_algo);

  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue;
  std::uint64_t seq = 0;
  std::size_t honest_sends = 0;
  std::map<std::size_t, std::size_t> honest_to_event;  // captured-send index -> event index

  auto add_event = [&](Party from, Party to, Bytes wire, Millis deliver, std::string label, bool deliver_it) {
    Event e;
    e.index = tr.events.size();
    e.send_time = clock_.now();
    e.from = from;
    e.to = to;
    e.wire = std::move(wire);
    e.adversary = std::move(label);
    e.delivered = deliver_it;
    e.deliver_time = deliver;
    tr.events.push_back(std::move(e));
    if (deliver_it) queue.push({deliver, seq++, tr.events.back().index});
    return tr.events.back().index;
  };

  // Honest send: the adversary script decides its fate.
  auto send = [&](Party from, Party to, Bytes wire) {
    const std::size_t n = honest_sends++;
    Millis deliver = clock_.now() + cfg_.hop_latency_ms;
    bool drop = false;
    std::string label = "pass";
    for (const auto& a : script.actions) {
      if (a.event != n) continue;
      switch (a.kind) {
        case Action::Kind::kDrop:
          drop = true;
          label = "drop";
          break;
        case Action::Kind::kDelay:
          deliver += a.ms;
          label = "delay";
          break;
        case Action::Kind::kMutate:
          if (a.offset >= wire.size()) throw std::out_of_range("mutation offset past end of message");
          wire[a.offset] ^= a.mask;
          label = "mutate";
          break;
        default:
          break;
      }
    }
    const auto idx = add_event(from, to, wire, deliver, label, !drop);
    honest_to_event[n] = idx;
    for (const auto& a : script.actions) {
      if (a.kind == Action::Kind::kReplay && a.event == n) {
        add_event(Party::kAdversary, to, tr.events[idx].wire, std::max(a.ms, clock_.now()), "replay", true);
      }
    }
  };

  for (const auto& a : script.actions) {
    if (a.kind == Action::Kind::kInject) add_event(Party::kAdversary, a.to, a.bytes, a.ms, "inject", true);
  }

  std::optional<UserSession> user_ctx;
  std::optional<PasswordChangeSession> pc_ctx;
  std::deque<GatewaySession> gw_ctx;

  if (init) {
    opcount::CountingScope scope(tr.ops[0]);
    auto login = user_login(suite_, init->card, init->creds);
    if (!login) {
      tr.login_rejection = login.error();
    } else if (init->new_pw) {
      auto req = user_pc_request(suite_, init->card, init->creds, *init->new_pw, clock_.local(Party::kUser),
                                 gw_.public_key(), rng_);
      if (!req) {
        tr.login_rejection = req.error();
      } else {
        pc_ctx = std::move(req.value().second);
        send(Party::kUser, Party::kGateway, encode(req.value().first, suite_.ec()));
      }
    } else {
      auto [m1, ctx] = user_auth_init(suite_, login.value(), init->sid, clock_.local(Party::kUser),
                                      gw_.public_key(), rng_);
      user_ctx = ctx;
      if (init->is_alice) last_user_session_ = ctx;
      send(Party::kUser, Party::kGateway, encode(m1, suite_.ec()));
    }
  }

  while (!queue.empty()) {
    const auto next = queue.top();
    queue.pop();
    clock_.advance_to(std::max(next.at, clock_.now()));
    const Event& ev = tr.events[next.event];
    const Party me = ev.to;
    const Millis now = clock_.local(me);
    Step step;
    step.event = ev.index;
    step.party = me;
    auto& ops = tr.ops[static_cast<std::size_t>(me)];
    opcount::CountingScope scope(ops);

    std::optional<Message> msg;
    try {
      msg = decode(ev.wire, suite_.ec());
      step.message = type_name(type_of(*msg));
    } catch (const std::invalid_argument& e) {
      step.rejection = reject(RejectReason::kMalformed, e.what());
    } catch (const CodecError& e) {
      step.rejection = reject(RejectReason::kMalformed, e.what());
    }
    if (!msg) {
      step.message = "?";
      tr.steps.push_back(std::move(step));
      continue;
    }

    auto wrong_party = [&] { step.rejection = reject(RejectReason::kMalformed, "unexpected message type"); };
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, M1>) {
            if (me != Party::kGateway) return wrong_party();
            auto r = gw_on_m1(gw_, m, now, rng_);
            if (!r) return void(step.rejection = r.error());
            gw_ctx.push_back(r.value().second);
            step.accepted = true;
            send(Party::kGateway, Party::kSensor, encode(r.value().first, suite_.ec()));
          } else if constexpr (std::is_same_v<T, M2>) {
            if (me != Party::kSensor) return wrong_party();
            auto r = sensor_on_m2(suite_, gw_.config(), sensor_, m, now, rng_);
            if (!r) return void(step.rejection = r.error());
            step.accepted = true;
            step.session_key = r.value().second;
            send(Party::kSensor, Party::kGateway, encode(r.value().first, suite_.ec()));
          } else if constexpr (std::is_same_v<T, M3>) {
            if (me != Party::kGateway) return wrong_party();
            if (gw_ctx.empty()) return void(step.rejection = reject(RejectReason::kNoPendingSession));
            auto r = gw_on_m3(gw_, gw_ctx.front(), m, now);
            if (!r) return void(step.rejection = r.error());
            gw_ctx.pop_front();
            step.accepted = true;
            step.session_key = r.value().second;
            send(Party::kGateway, Party::kUser, encode(r.value().first, suite_.ec()));
          } else if constexpr (std::is_same_v<T, M4>) {
            if (me != Party::kUser) return wrong_party();
            if (!user_ctx || !init) return void(step.rejection = reject(RejectReason::kNoPendingSession));
            auto r = user_on_m4(suite_, gw_.config(), init->card, *user_ctx, m, now);
            if (!r) return void(step.rejection = r.error());
            user_ctx.reset();
            step.accepted = true;
            step.session_key = r.value();
          } else if constexpr (std::is_same_v<T, PC1>) {
            if (me != Party::kGateway) return wrong_party();
            auto r = gw_on_pc(gw_, m, now);
            if (!r) return void(step.rejection = r.error());
            step.accepted = true;
            send(Party::kGateway, Party::kUser, encode(r.value(), suite_.ec()));
          } else if constexpr (std::is_same_v<T, PC2>) {
            if (me != Party::kUser) return wrong_party();
            if (!pc_ctx || !init) return void(step.rejection = reject(RejectReason::kNoPendingSession));
            auto r = user_pc_confirm(suite_, gw_.config(), init->card, *pc_ctx, m, now);
            if (!r) return void(step.rejection = r.error());
            pc_ctx.reset();
            step.accepted = true;
            if (init->is_alice) {
              card_ = r.value();
              creds_.pw = *init->new_pw;
            }
          }
        },
        *msg);
    tr.steps.push_back(std::move(step));
  }
  return tr;
}

Transcript run_session(std::uint64_t seed, const SimConfig& cfg) {
  Simulation sim(cfg, seed);
  return sim.handshake();
}

SessionSummary summarize(std::uint64_t seed, const Transcript& t) {
  SessionSummary out;
  out.seed = seed;
  out.complete = t.honest_complete();
  const auto keys = t.keys(Party::kUser);
  if (!keys.empty()) out.key_fp = fingerprint(keys.front());
  out.ops = observed_counts(t);
  return out;
}

std::vector<SessionSummary> run_sessions_serial(const std::vector<std::uint64_t>& seeds, const SimConfig& cfg) {
  std::vector<SessionSummary> out;
  out.reserve(seeds.size());
  for (const auto seed : seeds) out.push_back(summarize(seed, run_session(seed, cfg)));
  return out;
}

std::vector<SessionSummary> run_sessions_parallel(const std::vector<std::uint64_t>& seeds, const SimConfig& cfg) {
  std::vector<SessionSummary> out(seeds.size());
  const auto n = static_cast<std::ptrdiff_t>(seeds.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto seed = seeds[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = summarize(seed, run_session(seed, cfg));
  }
  return out;
}

costmodel::RoleCounts dos_probe(GatewayState& gw, ByteView bytes, Millis now, RandomSource& rng) {
  opcount::OpCounts ops;
  opcount::CountingScope scope(ops);
  try {
    const auto msg = decode(bytes, gw.suite().ec());
    if (const auto* m1 = std::get_if<M1>(&msg)) (void)gw_on_m1(gw, *m1, now, rng);
    if (const auto* pc1 = std::get_if<PC1>(&msg)) (void)gw_on_pc(gw, *pc1, now);
  } catch (const std::invalid_argument&) {
  } catch (const CodecError&) {
  }
  return costmodel::RoleCounts::from(ops);
}

costmodel::RoleCounts dos_probe_sensor(const Suite& suite, const Config& cfg, const SensorState& sensor,
                                       ByteView bytes, Millis now, RandomSource& rng) {
  opcount::OpCounts ops;
  opcount::CountingScope scope(ops);
  try {
    const auto msg = decode(bytes, suite.ec());
    if (const auto* m2 = std::get_if<M2>(&msg)) (void)sensor_on_m2(suite, cfg, sensor, *m2, now, rng);
  } catch (const std::invalid_argument&) {
  } catch (const CodecError&) {
  }
  return costmodel::RoleCounts::from(ops);
}

}  // namespace wsnake::simnet
