#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

// Symbolic terms and Dolev-Yao knowledge closure.
//
// Every Term built through the public constructors is in normal form;
// raw_* constructors skip normalization so normalize() can be exercised.

namespace wsnake::dolevyao {

enum class AtomKind : std::uint8_t { kFresh, kLongTerm, kPublic, kTimestamp };
enum class TermKind : std::uint8_t { kAtom, kHash, kXor, kSmul, kSenc, kTuple };

std::string_view atom_kind_name(AtomKind k);

class Term {
 public:
  /// The xor identity, so aggregates of terms can be filled in later.
  Term() : Term(zero()) {}
  static Term atom(std::string name, AtomKind kind);
  /// The xor identity.
  static Term zero();
  static Term hash(std::vector<Term> args);
  static Term xor_of(std::vector<Term> elems);
  static Term smul(std::vector<Term> scalars, Term base);
  static Term senc(Term key, Term payload);
  static Term tuple(std::vector<Term> elems);

  static Term raw_hash(std::vector<Term> args);
  static Term raw_xor(std::vector<Term> elems);
  static Term raw_smul(std::vector<Term> scalars, Term base);
  static Term raw_senc(Term key, Term payload);
  static Term raw_tuple(std::vector<Term> elems);

  TermKind kind() const;
  const std::string& name() const;  // atoms only
  AtomKind atom_kind() const;       // atoms only
  /// hash args, xor elements, smul scalars, tuple elements, or {key, payload}.
  const std::vector<Term>& args() const;
  /// smul only.
  const Term& base() const;

  /// Canonical structural key; equal keys mean equal terms.
  const std::string& key() const;
  /// Opaque constructors (hash, senc) and atoms count 1; xor, smul and
  /// tuple count their parts.
  std::size_t size() const;
  bool is_zero() const;
  /// False for terms built by the raw_* constructors.
  bool is_normal() const;

  friend bool operator==(const Term& a, const Term& b) { return a.key() == b.key(); }
  friend std::strong_ordering operator<=>(const Term& a, const Term& b) { return a.key() <=> b.key(); }

 private:
  struct Node;
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Term make(TermKind k, std::vector<Term> args, std::optional<Term> base);
  static Term raw(TermKind k, std::vector<Term> args, std::optional<Term> base);
  std::shared_ptr<const Node> node_;
};

/// Rebuilds `t` bottom-up through the normalizing constructors.
Term normalize(const Term& t);

/// Every subterm of `t`, including `t` itself.
void collect_subterms(const Term& t, std::set<Term>& out);

/// Display names for well-known terms; anything unnamed is printed
/// structurally.
using Names = std::map<std::string, std::string>;  // key() -> label
std::string render(const Term& t, const Names& names = {});

struct Limits {
  int max_rounds = 6;
  std::size_t max_size = 8;
};

struct LogEntry {
  Term term;
  std::string rule;  // initial, proj, sdec, xor, hash, tuple, senc, smul
  std::vector<std::size_t> premises;  // indices of earlier entries
  int round = 0;
};

/// Set of normalized terms plus how each was obtained.
class KnowledgeSet {
 public:
  KnowledgeSet() = default;
  explicit KnowledgeSet(const std::vector<Term>& initial);

  bool contains(const Term& t) const { return index_.contains(t); }
  std::optional<std::size_t> index_of(const Term& t) const;
  const std::vector<LogEntry>& log() const { return log_; }
  std::size_t size() const { return log_.size(); }
  std::vector<Term> initial() const;

  /// True when the last saturation stopped on the round limit rather than
  /// at a fixpoint.
  bool bounded() const { return bounded_; }
  int rounds() const { return rounds_; }

  /// Adds a term with its justification; returns false if already known.
  bool add(const Term& t, std::string rule, std::vector<std::size_t> premises, int round);

  /// Structural subset test over terms only.
  bool subset_of(const KnowledgeSet& other) const;

 private:
  friend KnowledgeSet saturate(const KnowledgeSet&, const Limits&, const std::vector<Term>&);
  std::vector<LogEntry> log_;
  std::map<Term, std::size_t> index_;
  bool bounded_ = false;
  int rounds_ = 0;
};

/// Closure under projection, decryption with a known key, xor with a
/// cancellation, multiplying a known point by a known secret atom or smul
/// scalar (no repeats), and composition of
/// hash / tuple / senc / xor terms that occur as subterms of the initial
/// knowledge or of `targets`. Throws std::invalid_argument on non-positive
/// limits.
KnowledgeSet saturate(const KnowledgeSet& k, const Limits& limits = {}, const std::vector<Term>& targets = {});

struct DerivationTree {
  Term term;
  std::string rule;
  std::vector<DerivationTree> premises;
};

DerivationTree derivation_of(const KnowledgeSet& k, std::size_t index);

/// Re-checks every node of `tree` against the rules from scratch: leaves
/// must be in `initial`, inner nodes must recompute to their conclusion.
/// On failure `why` (if given) names the offending node.
bool verify_derivation(const DerivationTree& tree, const std::set<Term>& initial, std::string* why = nullptr);

/// Flattened, topologically ordered proof lines ("[3] e2 <- smul [0, 1]").
std::vector<std::string> derivation_log(const DerivationTree& tree, const Names& names = {});
nlohmann::json derivation_json(const DerivationTree& tree, const Names& names = {});

struct DerivabilityResult {
  bool derivable = false;
  bool fixpoint = false;  // saturation reached a fixpoint (no round limit hit)
  std::optional<DerivationTree> tree;
  KnowledgeSet closure;
};

DerivabilityResult derivable(const KnowledgeSet& k, const Term& target, const Limits& limits = {});

}  // namespace wsnake::dolevyao
