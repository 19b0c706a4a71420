#pragma once

#include <string>
#include <vector>

#include "wsnake/dolevyao.hpp"

namespace wsnake::dolevyao {

/// Per-session symbols of one handshake.
struct SessionTerms {
  Term a, b, c, d;
  Term t1, t2, t3, t4;
  Term e1, e2, ae_key, e3, p2b_e2, e4, e5, sp1, sp2, e6, dh, sk, gp, sku, e7;
  Term m1;  // <e1, e3>
};

/// The handshake as terms. Long-term values are shared by every session.
struct ProtocolModel {
  Term g, x, s, id, sid, pw, bmp, q, z, uap, b, c, d, as, tag_kdf, tag_p2b;
  SessionTerms honest;
  Names names;

  /// Session `label` started by whoever knows scalar `a` for verifier `b`.
  SessionTerms session(const std::string& label, const Term& a, const Term& b_star);
  /// G, X, ID, SID, the domain tags and all timestamps of `sessions`.
  std::vector<Term> public_knowledge(const std::vector<const SessionTerms*>& sessions) const;
  /// e1, e3, SP1, SP2, T2, e5, e6, GP, T3, e7.
  static std::vector<Term> transcript(const SessionTerms& s);
};

ProtocolModel protocol_model();

struct SecrecyTarget {
  std::string label;
  Term term;
  bool expect_derivable = false;
};

struct SecrecyScenario {
  std::string name;
  std::string summary;
  std::string claim;          // the published property this scenario checks
  std::vector<std::string> compromised;
  std::vector<Term> knowledge;
  std::vector<SecrecyTarget> targets;
  Names names;
};

struct TargetResult {
  std::string label;
  std::string term;
  bool derivable = false;
  bool expect_derivable = false;
  bool verified = false;  // derivation tree re-checked independently
  std::optional<DerivationTree> tree;
  std::vector<std::string> log;
  bool divergent() const { return derivable != expect_derivable; }
};

struct ScenarioReport {
  std::string name;
  std::string summary;
  std::string claim;
  std::vector<std::string> compromised;
  std::vector<std::string> knowledge;
  Limits limits;
  bool fixpoint = false;
  int rounds = 0;
  std::size_t closure_size = 0;
  std::vector<TargetResult> targets;

  bool divergent() const;
  /// Every positive verdict carries a verified derivation.
  bool well_formed() const;
  nlohmann::json to_json() const;
  std::string to_text() const;
};

const std::vector<std::string>& scenario_names();
/// Throws std::invalid_argument listing the catalog for an unknown name.
SecrecyScenario make_scenario(std::string_view name);
ScenarioReport run_scenario(const SecrecyScenario& s, const Limits& limits = {});
ScenarioReport run_secrecy_scenario(std::string_view name, const Limits& limits = {});

}  // namespace wsnake::dolevyao
