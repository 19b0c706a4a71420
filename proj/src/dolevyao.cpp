#include "wsnake/dolevyao.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace wsnake::dolevyao {

std::string_view atom_kind_name(AtomKind k) {
  switch (k) {
    case AtomKind::kFresh: return "fresh-secret";
    case AtomKind::kLongTerm: return "long-term-secret";
    case AtomKind::kPublic: return "public";
    case AtomKind::kTimestamp: return "timestamp";
  }
  return "?";
}

struct Term::Node {
  TermKind kind = TermKind::kAtom;
  std::string name;
  AtomKind atom_kind = AtomKind::kPublic;
  std::vector<Term> args;
  std::optional<Term> base;
  std::string key;
  std::size_t size = 1;
  bool normal = true;  // built by a normalizing constructor
};

namespace {

std::string join_keys(const std::vector<Term>& ts) {
  std::string out;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i) out += ',';
    out += ts[i].key();
  }
  return out;
}

// Elements a term contributes to an xor multiset.
std::size_t xor_width(const Term& t) {
  if (t.is_zero()) return 0;
  return t.kind() == TermKind::kXor ? t.args().size() : 1;
}

}  // namespace

Term Term::make(TermKind k, std::vector<Term> args, std::optional<Term> base) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  switch (k) {
    case TermKind::kHash: n->key = "h(" + join_keys(args) + ")"; break;
    case TermKind::kXor: n->key = "x{" + join_keys(args) + "}"; break;
    case TermKind::kSmul: n->key = "m{" + join_keys(args) + "}(" + base->key() + ")"; break;
    case TermKind::kSenc: n->key = "E(" + join_keys(args) + ")"; break;
    case TermKind::kTuple: n->key = "<" + join_keys(args) + ">"; break;
    case TermKind::kAtom: throw std::logic_error("atoms are built by Term::atom");
  }
  if (k == TermKind::kHash || k == TermKind::kSenc) {
    n->size = 1;
  } else {
    n->size = base ? base->size() : 0;
    for (const auto& a : args) n->size += a.size();
  }
  n->args = std::move(args);
  n->base = std::move(base);
  return Term(std::move(n));
}

Term Term::atom(std::string name, AtomKind kind) {
  if (name.empty()) throw std::invalid_argument("atom name must be non-empty");
  auto n = std::make_shared<Node>();
  n->kind = TermKind::kAtom;
  n->key = name;
  n->name = std::move(name);
  n->atom_kind = kind;
  return Term(std::move(n));
}

Term Term::zero() {
  static const Term z = atom("0", AtomKind::kPublic);
  return z;
}

bool Term::is_zero() const { return node_->kind == TermKind::kAtom && node_->name == "0"; }

TermKind Term::kind() const { return node_->kind; }
const std::string& Term::name() const { return node_->name; }
AtomKind Term::atom_kind() const { return node_->atom_kind; }
const std::vector<Term>& Term::args() const { return node_->args; }
const Term& Term::base() const {
  if (!node_->base) throw std::logic_error("base() on a non-smul term");
  return *node_->base;
}
const std::string& Term::key() const { return node_->key; }
std::size_t Term::size() const { return node_->size; }
bool Term::is_normal() const { return node_->normal; }

Term Term::raw(TermKind k, std::vector<Term> args, std::optional<Term> base) {
  Term t = make(k, std::move(args), std::move(base));
  std::const_pointer_cast<Node>(t.node_)->normal = false;
  return t;
}

Term Term::raw_hash(std::vector<Term> args) { return raw(TermKind::kHash, std::move(args), std::nullopt); }
Term Term::raw_senc(Term key, Term payload) { return raw(TermKind::kSenc, {std::move(key), std::move(payload)}, std::nullopt); }
Term Term::raw_tuple(std::vector<Term> elems) { return raw(TermKind::kTuple, std::move(elems), std::nullopt); }
Term Term::raw_xor(std::vector<Term> elems) { return raw(TermKind::kXor, std::move(elems), std::nullopt); }
Term Term::raw_smul(std::vector<Term> scalars, Term base) {
  return raw(TermKind::kSmul, std::move(scalars), std::move(base));
}

namespace {

std::vector<Term> normal_all(std::vector<Term> ts) {
  for (auto& t : ts) t = normalize(t);
  return ts;
}

}  // namespace

Term Term::hash(std::vector<Term> args) { return make(TermKind::kHash, normal_all(std::move(args)), std::nullopt); }

Term Term::senc(Term key, Term payload) {
  return make(TermKind::kSenc, {normalize(key), normalize(payload)}, std::nullopt);
}

Term Term::tuple(std::vector<Term> elems) {
  std::vector<Term> flat;
  for (auto& e : normal_all(std::move(elems))) {
    if (e.kind() == TermKind::kTuple) {
      flat.insert(flat.end(), e.args().begin(), e.args().end());
    } else {
      flat.push_back(std::move(e));
    }
  }
  if (flat.size() == 1) return flat.front();
  return make(TermKind::kTuple, std::move(flat), std::nullopt);
}

Term Term::xor_of(std::vector<Term> elems) {
  std::vector<Term> flat;
  for (auto& e : normal_all(std::move(elems))) {
    if (e.kind() == TermKind::kXor) {
      flat.insert(flat.end(), e.args().begin(), e.args().end());
    } else if (!e.is_zero()) {
      flat.push_back(std::move(e));
    }
  }
  std::sort(flat.begin(), flat.end());
  std::vector<Term> kept;
  for (std::size_t i = 0; i < flat.size();) {
    std::size_t j = i;
    while (j < flat.size() && flat[j] == flat[i]) ++j;
    if ((j - i) % 2 == 1) kept.push_back(flat[i]);
    i = j;
  }
  if (kept.empty()) return zero();
  if (kept.size() == 1) return kept.front();
  return make(TermKind::kXor, std::move(kept), std::nullopt);
}

Term Term::smul(std::vector<Term> scalars, Term base) {
  scalars = normal_all(std::move(scalars));
  base = normalize(base);
  if (base.kind() == TermKind::kSmul) {
    scalars.insert(scalars.end(), base.args().begin(), base.args().end());
    base = base.base();
  }
  if (scalars.empty()) return base;
  std::sort(scalars.begin(), scalars.end());
  return make(TermKind::kSmul, std::move(scalars), std::move(base));
}

Term normalize(const Term& t) {
  if (t.is_normal()) return t;
  switch (t.kind()) {
    case TermKind::kAtom: return t;
    case TermKind::kHash: return Term::hash(t.args());
    case TermKind::kXor: return Term::xor_of(t.args());
    case TermKind::kSmul: return Term::smul(t.args(), t.base());
    case TermKind::kSenc: return Term::senc(t.args()[0], t.args()[1]);
    case TermKind::kTuple: return Term::tuple(t.args());
  }
  return t;
}

void collect_subterms(const Term& t, std::set<Term>& out) {
  if (!out.insert(t).second) return;
  for (const auto& a : t.args()) collect_subterms(a, out);
  if (t.kind() == TermKind::kSmul) collect_subterms(t.base(), out);
}

std::string render(const Term& t, const Names& names) {
  if (auto it = names.find(t.key()); it != names.end()) return it->second;
  auto list = [&](std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < t.args().size(); ++i) {
      if (i) out += sep;
      out += render(t.args()[i], names);
    }
    return out;
  };
  switch (t.kind()) {
    case TermKind::kAtom: return t.name();
    case TermKind::kHash: return "h(" + list(", ") + ")";
    case TermKind::kXor: return "(" + list(" ^ ") + ")";
    case TermKind::kSmul: return "[" + list(".") + "]" + render(t.base(), names);
    case TermKind::kSenc: return "E{" + render(t.args()[0], names) + "}(" + render(t.args()[1], names) + ")";
    case TermKind::kTuple: return "<" + list(", ") + ">";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// KnowledgeSet

KnowledgeSet::KnowledgeSet(const std::vector<Term>& initial) {
  for (const auto& t : initial) add(normalize(t), "initial", {}, 0);
}

std::optional<std::size_t> KnowledgeSet::index_of(const Term& t) const {
  auto it = index_.find(t);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<Term> KnowledgeSet::initial() const {
  std::vector<Term> out;
  for (const auto& e : log_) {
    if (e.rule == "initial") out.push_back(e.term);
  }
  return out;
}

bool KnowledgeSet::add(const Term& t, std::string rule, std::vector<std::size_t> premises, int round) {
  if (index_.contains(t)) return false;
  for (auto p : premises) {
    if (p >= log_.size()) throw std::out_of_range("premise refers to an unknown entry");
  }
  index_.emplace(t, log_.size());
  log_.push_back({t, std::move(rule), std::move(premises), round});
  return true;
}

bool KnowledgeSet::subset_of(const KnowledgeSet& other) const {
  return std::all_of(log_.begin(), log_.end(), [&](const LogEntry& e) { return other.contains(e.term); });
}

namespace {

struct Candidate {
  Term term;
  std::string rule;
  std::vector<std::size_t> premises;
};

class Saturator {
 public:
  Saturator(const KnowledgeSet& k, const Limits& limits, const std::vector<Term>& targets) : limits_(limits) {
    for (const auto& e : k.log()) collect_subterms(e.term, sub_);
    for (const auto& t : targets) collect_subterms(normalize(t), sub_);
    for (const auto& s : sub_) {
      if (s.kind() == TermKind::kAtom && (s.atom_kind() == AtomKind::kFresh || s.atom_kind() == AtomKind::kLongTerm)) {
        scalars_.insert(s);
      }
      if (s.kind() != TermKind::kSmul) continue;
      points_.insert(s);
      points_.insert(s.base());
      scalars_.insert(s.args().begin(), s.args().end());
    }
  }

  // One round of rule applications over the first `n` entries of `k`.
  std::vector<Candidate> step(const KnowledgeSet& k, std::size_t n) const {
    std::vector<Candidate> out;
    std::set<Term> seen;
    auto known = [&](const Term& t) -> std::optional<std::size_t> {
      auto i = k.index_of(t);
      if (i && *i < n) return i;
      return std::nullopt;
    };
    auto offer = [&](Term t, const char* rule, std::vector<std::size_t> premises) {
      if (t.size() > limits_.max_size || k.contains(t) || !seen.insert(t).second) return;
      out.push_back({std::move(t), rule, std::move(premises)});
    };
    const auto& log = k.log();

    for (std::size_t i = 0; i < n; ++i) {
      const Term& t = log[i].term;
      if (t.kind() == TermKind::kTuple) {
        for (const auto& e : t.args()) offer(e, "proj", {i});
      } else if (t.kind() == TermKind::kSenc) {
        if (auto key = known(t.args()[0])) offer(t.args()[1], "sdec", {i, *key});
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      const Term& t = log[i].term;
      for (std::size_t j = 0; j < i; ++j) {
        const Term& u = log[j].term;
        if (t.kind() != TermKind::kXor && u.kind() != TermKind::kXor && !sub_.contains(Term::xor_of({t, u}))) continue;
        Term r = Term::xor_of({t, u});
        if (r.is_zero()) continue;
        const bool cancels = xor_width(r) < xor_width(t) + xor_width(u);
        if (cancels || sub_.contains(r)) offer(std::move(r), "xor", {i, j});
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      const Term& k_i = log[i].term;
      if (!scalars_.contains(k_i)) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const Term& p = log[j].term;
        if (!points_.contains(p) && p.kind() != TermKind::kSmul) continue;
        if (p.kind() == TermKind::kSmul &&
            std::find(p.args().begin(), p.args().end(), k_i) != p.args().end()) {
          continue;
        }
        offer(Term::smul({k_i}, p), "smul", {i, j});
      }
    }

    for (const auto& s : sub_) {
      if (k.contains(s)) continue;
      std::vector<std::size_t> premises;
      bool all = true;
      for (const auto& a : s.args()) {
        auto idx = known(a);
        if (!idx) {
          all = false;
          break;
        }
        premises.push_back(*idx);
      }
      if (!all) continue;
      switch (s.kind()) {
        case TermKind::kHash: offer(s, "hash", std::move(premises)); break;
        case TermKind::kTuple: offer(s, "tuple", std::move(premises)); break;
        case TermKind::kSenc: offer(s, "senc", std::move(premises)); break;
        default: break;
      }
    }
    return out;
  }

 private:
  Limits limits_;
  std::set<Term> sub_;
  std::set<Term> points_;
  std::set<Term> scalars_;
};

}  // namespace

KnowledgeSet saturate(const KnowledgeSet& k, const Limits& limits, const std::vector<Term>& targets) {
  if (limits.max_rounds <= 0 || limits.max_size == 0) throw std::invalid_argument("saturation limits must be positive");
  Saturator sat(k, limits, targets);
  KnowledgeSet out = k;
  out.bounded_ = false;
  out.rounds_ = 0;
  for (int round = 1; round <= limits.max_rounds; ++round) {
    auto found = sat.step(out, out.size());
    if (found.empty()) return out;
    for (auto& c : found) out.add(c.term, std::move(c.rule), std::move(c.premises), round);
    out.rounds_ = round;
  }
  out.bounded_ = !sat.step(out, out.size()).empty();
  return out;
}

DerivationTree derivation_of(const KnowledgeSet& k, std::size_t index) {
  const auto& e = k.log().at(index);
  DerivationTree t{e.term, e.rule, {}};
  for (auto p : e.premises) t.premises.push_back(derivation_of(k, p));
  return t;
}

bool verify_derivation(const DerivationTree& tree, const std::set<Term>& initial, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg + ": " + render(tree.term);
    return false;
  };
  const auto& t = tree.term;
  const auto& p = tree.premises;
  if (normalize(t) != t) return fail("conclusion not in normal form");
  for (const auto& sub : p) {
    if (!verify_derivation(sub, initial, why)) return false;
  }
  auto terms = [&] {
    std::vector<Term> ts;
    for (const auto& s : p) ts.push_back(s.term);
    return ts;
  };
  const auto& r = tree.rule;
  bool ok = false;
  if (r == "initial") {
    ok = p.empty() && initial.contains(t);
  } else if (r == "proj") {
    ok = p.size() == 1 && p[0].term.kind() == TermKind::kTuple &&
         std::find(p[0].term.args().begin(), p[0].term.args().end(), t) != p[0].term.args().end();
  } else if (r == "sdec") {
    ok = p.size() == 2 && p[0].term.kind() == TermKind::kSenc && p[0].term.args()[0] == p[1].term &&
         p[0].term.args()[1] == t;
  } else if (r == "xor") {
    ok = p.size() == 2 && Term::xor_of({p[0].term, p[1].term}) == t;
  } else if (r == "smul") {
    ok = p.size() == 2 && Term::smul({p[0].term}, p[1].term) == t;
  } else if (r == "hash") {
    ok = t.kind() == TermKind::kHash && Term::hash(terms()) == t;
  } else if (r == "tuple") {
    ok = t.kind() == TermKind::kTuple && Term::tuple(terms()) == t;
  } else if (r == "senc") {
    ok = p.size() == 2 && Term::senc(p[0].term, p[1].term) == t;
  } else {
    return fail("unknown rule '" + r + "'");
  }
  return ok ? true : fail("rule '" + r + "' does not yield");
}

std::vector<std::string> derivation_log(const DerivationTree& tree, const Names& names) {
  std::vector<std::string> lines;
  std::map<Term, std::size_t> ids;
  std::function<std::size_t(const DerivationTree&)> visit = [&](const DerivationTree& n) {
    if (auto it = ids.find(n.term); it != ids.end()) return it->second;
    std::vector<std::size_t> ps;
    for (const auto& c : n.premises) ps.push_back(visit(c));
    const auto id = lines.size();
    std::string line = "[" + std::to_string(id) + "] " + render(n.term, names) + " <- " + n.rule;
    if (!ps.empty()) {
      line += " [";
      for (std::size_t i = 0; i < ps.size(); ++i) line += (i ? ", " : "") + std::to_string(ps[i]);
      line += "]";
    }
    lines.push_back(std::move(line));
    ids.emplace(n.term, id);
    return id;
  };
  visit(tree);
  return lines;
}

nlohmann::json derivation_json(const DerivationTree& tree, const Names& names) {
  nlohmann::json out{{"term", render(tree.term, names)}, {"rule", tree.rule}};
  if (!tree.premises.empty()) {
    out["premises"] = nlohmann::json::array();
    for (const auto& p : tree.premises) out["premises"].push_back(derivation_json(p, names));
  }
  return out;
}

DerivabilityResult derivable(const KnowledgeSet& k, const Term& target, const Limits& limits) {
  DerivabilityResult r;
  const Term t = normalize(target);
  r.closure = saturate(k, limits, {t});
  r.fixpoint = !r.closure.bounded();
  if (auto idx = r.closure.index_of(t)) {
    r.derivable = true;
    r.tree = derivation_of(r.closure, *idx);
  }
  return r;
}

}  // namespace wsnake::dolevyao
