#include "wsnake/secrecy.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace wsnake::dolevyao {

namespace {

Term fresh(const std::string& n) { return Term::atom(n, AtomKind::kFresh); }
Term secret(const std::string& n) { return Term::atom(n, AtomKind::kLongTerm); }
Term pub(const std::string& n) { return Term::atom(n, AtomKind::kPublic); }
Term stamp(const std::string& n) { return Term::atom(n, AtomKind::kTimestamp); }

}  // namespace

SessionTerms ProtocolModel::session(const std::string& label, const Term& a, const Term& b_star) {
  SessionTerms st;
  auto nm = [&](const Term& t, const std::string& n) { names.emplace(t.key(), n + label); };
  st.a = a;
  st.b = fresh("b" + label);
  st.c = fresh("c" + label);
  st.d = fresh("d" + label);
  st.t1 = stamp("T1" + label);
  st.t2 = stamp("T2" + label);
  st.t3 = stamp("T3" + label);
  st.t4 = stamp("T4" + label);
  st.e1 = Term::smul({a}, g);
  st.e2 = Term::smul({a}, x);
  st.ae_key = Term::hash({tag_kdf, st.e2});
  st.e3 = Term::senc(st.ae_key, Term::tuple({b_star, sid, st.t1}));
  st.p2b_e2 = Term::hash({tag_p2b, st.e2});
  st.e4 = Term::xor_of({st.b, st.p2b_e2});
  st.e5 = Term::smul({st.c}, g);
  st.sp1 = Term::xor_of({st.e4, as});
  st.sp2 = Term::hash({st.e4, sid, st.t2});
  st.e6 = Term::smul({st.d}, g);
  st.dh = Term::smul({st.c, st.d}, g);
  st.sk = Term::hash({st.e4, Term::hash({tag_p2b, st.dh})});
  st.gp = Term::hash({st.sk, as, st.t3});
  st.sku = Term::xor_of({st.sk, z});
  st.e7 = Term::senc(st.ae_key, Term::tuple({b_star, st.sku, st.t4}));
  st.m1 = Term::tuple({st.e1, st.e3});
  for (auto [t, n] : std::initializer_list<std::pair<const Term*, const char*>>{
           {&st.e1, "e1"}, {&st.e2, "e2"}, {&st.ae_key, "K"}, {&st.e3, "e3"}, {&st.p2b_e2, "p2b(e2)"},
           {&st.e4, "e4"}, {&st.e5, "e5"}, {&st.sp1, "SP1"}, {&st.sp2, "SP2"}, {&st.e6, "e6"}, {&st.dh, "cdG"},
           {&st.sk, "SK"}, {&st.gp, "GP"}, {&st.sku, "SKU"}, {&st.e7, "e7"}, {&st.m1, "M1"}}) {
    nm(*t, n);
  }
  return st;
}

std::vector<Term> ProtocolModel::public_knowledge(const std::vector<const SessionTerms*>& sessions) const {
  std::vector<Term> out{g, x, id, sid, tag_kdf, tag_p2b};
  for (const auto* s : sessions) out.insert(out.end(), {s->t1, s->t2, s->t3, s->t4});
  return out;
}

std::vector<Term> ProtocolModel::transcript(const SessionTerms& s) {
  return {s.e1, s.e3, s.sp1, s.sp2, s.t2, s.e5, s.e6, s.gp, s.t3, s.e7};
}

ProtocolModel protocol_model() {
  ProtocolModel m;
  m.g = pub("G");
  m.s = secret("S");
  m.x = Term::smul({m.s}, m.g);
  m.id = pub("ID");
  m.sid = pub("SID");
  m.pw = secret("PW");
  m.bmp = secret("BMP");
  m.q = secret("q");
  m.z = secret("z");
  m.tag_kdf = pub("kdf");
  m.tag_p2b = pub("p2b");
  m.uap = Term::hash({m.pw, m.bmp, m.q});
  m.b = Term::hash({m.id, m.uap, m.z});
  m.c = Term::hash({m.id, m.s});
  m.d = Term::hash({m.c, m.b, m.z});
  m.as = Term::hash({m.sid, m.s});
  for (auto [t, n] : std::initializer_list<std::pair<const Term*, const char*>>{
           {&m.x, "X"}, {&m.uap, "UAP"}, {&m.b, "B"}, {&m.c, "C"}, {&m.d, "D"}, {&m.as, "AS"}}) {
    m.names.emplace(t->key(), n);
  }
  m.honest = m.session("", fresh("a"), m.b);
  return m;
}

// ---------------------------------------------------------------------------
// Scenarios

namespace {

std::vector<Term> concat(std::vector<Term> a, const std::vector<Term>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

SecrecyScenario base(ProtocolModel& m, std::string name, std::string summary, std::string claim) {
  SecrecyScenario s;
  s.name = std::move(name);
  s.summary = std::move(summary);
  s.claim = std::move(claim);
  s.knowledge = concat(m.public_knowledge({&m.honest}), ProtocolModel::transcript(m.honest));
  return s;
}

void compromise(SecrecyScenario& s, const ProtocolModel& m, std::vector<Term> ts) {
  for (auto& t : ts) {
    s.compromised.push_back(render(t, m.names));
    s.knowledge.push_back(std::move(t));
  }
}

SecrecyScenario build(std::string_view name) {
  auto m = protocol_model();
  const auto& h = m.honest;
  SecrecyScenario s;
  if (name == "pfs") {
    s = base(m, "pfs", "transcript plus the gateway's long-term S", "perfect forward secrecy");
    compromise(s, m, {m.s, m.sid});
    s.targets = {{"SK", h.sk, false}};
  } else if (name == "insider") {
    s = base(m, "insider", "registered user with own session values and card", "privileged-insider resistance");
    compromise(s, m, {h.a, h.e2, m.c, m.d, m.z, m.q});
    s.targets = {{"AS", m.as, false}};
  } else if (name == "stolen-card") {
    s = base(m, "stolen-card", "transcript plus the card contents, no password", "stolen smart card resistance");
    compromise(s, m, {m.c, m.d, m.z, m.q});
    s.targets = {{"SK", h.sk, false}, {"B", m.b, false}};
  } else if (name == "stolen-verifier") {
    // Fresh world: the attacker never saw the honest session, only the
    // gateway's stored (B, z) and its own run against the gateway.
    s.name = "stolen-verifier";
    s.summary = "gateway verifier table (B, z) plus the attacker's own session";
    s.claim = "stolen-verifier resistance";
    const auto adv = m.session("'", fresh("a_adv"), m.b);
    s.knowledge = m.public_knowledge({&adv});
    compromise(s, m, {m.b, m.z, adv.a, adv.e7});
    s.targets = {{"gateway-acceptable M1", adv.m1, false}, {"SK of that session", adv.sk, false}};
  } else if (name == "outsider-mitm") {
    s = base(m, "outsider-mitm", "transcript only", "man-in-the-middle resistance");
    s.targets = {{"SK", h.sk, false}, {"B", m.b, false}, {"AS", m.as, false}, {"z", m.z, false}, {"S", m.s, false}};
  } else if (name == "s-z-compromise") {
    s = base(m, "s-z-compromise", "transcript plus S and the user's z", "none (full compromise reads SK)");
    compromise(s, m, {m.s, m.z});
    s.targets = {{"SK", h.sk, true}};
  } else {
    std::string msg = "unknown secrecy scenario '" + std::string(name) + "'; known:";
    for (const auto& n : scenario_names()) msg += " " + n;
    throw std::invalid_argument(msg);
  }
  s.names = m.names;
  for (const auto& t : s.targets) {
    if (std::find(s.knowledge.begin(), s.knowledge.end(), t.term) != s.knowledge.end()) {
      throw std::logic_error("target " + t.label + " is already in the initial knowledge");
    }
  }
  return s;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> n{"pfs",           "insider",       "stolen-card",
                                          "stolen-verifier", "outsider-mitm", "s-z-compromise"};
  return n;
}

SecrecyScenario make_scenario(std::string_view name) { return build(name); }

ScenarioReport run_scenario(const SecrecyScenario& s, const Limits& limits) {
  ScenarioReport r;
  r.name = s.name;
  r.summary = s.summary;
  r.claim = s.claim;
  r.compromised = s.compromised;
  r.limits = limits;
  for (const auto& t : s.knowledge) r.knowledge.push_back(render(t, s.names));

  const KnowledgeSet init(s.knowledge);
  std::vector<Term> targets;
  for (const auto& t : s.targets) targets.push_back(t.term);
  const auto closure = saturate(init, limits, targets);
  r.fixpoint = !closure.bounded();
  r.rounds = closure.rounds();
  r.closure_size = closure.size();

  const auto initial = init.initial();
  const std::set<Term> initial_set(initial.begin(), initial.end());
  for (const auto& t : s.targets) {
    TargetResult tr;
    tr.label = t.label;
    tr.term = render(t.term, s.names);
    tr.expect_derivable = t.expect_derivable;
    if (auto idx = closure.index_of(t.term)) {
      tr.derivable = true;
      tr.tree = derivation_of(closure, *idx);
      tr.verified = verify_derivation(*tr.tree, initial_set);
      tr.log = derivation_log(*tr.tree, s.names);
    }
    r.targets.push_back(std::move(tr));
  }
  return r;
}

ScenarioReport run_secrecy_scenario(std::string_view name, const Limits& limits) {
  return run_scenario(make_scenario(name), limits);
}

bool ScenarioReport::divergent() const {
  return std::any_of(targets.begin(), targets.end(), [](const TargetResult& t) { return t.divergent(); });
}

bool ScenarioReport::well_formed() const {
  return std::all_of(targets.begin(), targets.end(),
                     [](const TargetResult& t) { return !t.derivable || (t.tree && t.verified && !t.log.empty()); });
}

namespace {

std::string verdict_text(bool derivable, bool fixpoint) {
  if (derivable) return "derivable";
  return fixpoint ? "not derivable (closure reached a fixpoint)" : "not derivable within limits";
}

}  // namespace

nlohmann::json ScenarioReport::to_json() const {
  nlohmann::json out{{"scenario", name},
                     {"summary", summary},
                     {"claim", claim},
                     {"compromised", compromised},
                     {"knowledge", knowledge},
                     {"limits", {{"max_rounds", limits.max_rounds}, {"max_size", limits.max_size}}},
                     {"rounds", rounds},
                     {"fixpoint", fixpoint},
                     {"closure_size", closure_size},
                     {"divergence", divergent()}};
  out["targets"] = nlohmann::json::array();
  for (const auto& t : targets) {
    nlohmann::json j{{"target", t.label},
                     {"term", t.term},
                     {"verdict", verdict_text(t.derivable, fixpoint)},
                     {"derivable", t.derivable},
                     {"claimed", t.expect_derivable ? "derivable" : "not derivable"},
                     {"divergence", t.divergent()}};
    if (t.tree) {
      j["verified"] = t.verified;
      j["log"] = t.log;
      j["tree"] = derivation_json(*t.tree);
    }
    out["targets"].push_back(std::move(j));
  }
  return out;
}

std::string ScenarioReport::to_text() const {
  std::ostringstream os;
  os << "scenario:    " << name << " (" << summary << ")\n"
     << "claim:       " << claim << "\n";
  os << "compromised: ";
  for (std::size_t i = 0; i < compromised.size(); ++i) os << (i ? ", " : "") << compromised[i];
  os << (compromised.empty() ? "(nothing)" : "") << "\n";
  os << "limits:      " << limits.max_rounds << " rounds, term size " << limits.max_size << "; closure "
     << closure_size << " terms after " << rounds << " rounds" << (fixpoint ? " (fixpoint)" : " (bounded)") << "\n";
  for (const auto& t : targets) {
    os << "target " << t.label << ": " << verdict_text(t.derivable, fixpoint) << "  [claimed: "
       << (t.expect_derivable ? "derivable" : "not derivable") << "]" << (t.divergent() ? "  DIVERGENCE" : "")
       << "\n";
    if (t.tree) {
      os << "  derivation (" << (t.verified ? "re-verified" : "FAILED re-verification") << "):\n";
      for (const auto& l : t.log) os << "    " << l << "\n";
    }
  }
  if (divergent()) os << "DIVERGENCE: the engine's verdict differs from the claimed property\n";
  return os.str();
}

}  // namespace wsnake::dolevyao
