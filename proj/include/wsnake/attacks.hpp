#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "wsnake/simnet.hpp"

namespace wsnake::simnet {

enum class Verdict { kPrevented, kSucceeded };
std::string_view verdict_name(Verdict v);

struct Check {
  std::string label;
  bool ok = false;
};

struct AttackOutcome {
  std::string name;
  std::string claim;  // what the protocol is claimed to resist
  Verdict verdict = Verdict::kPrevented;
  Verdict expected = Verdict::kPrevented;
  std::string reason;  // rejection reason at the deciding step, if any
  costmodel::CostProfile costs;
  std::vector<Check> checks;
  std::vector<std::string> notes;

  bool divergent() const { return verdict != expected; }
  /// Every check passed and the verdict matches expectations.
  bool matches() const;
  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Catalog names, in listing order.
const std::vector<std::string>& attack_names();
std::string_view attack_summary(std::string_view name);

/// Throws std::invalid_argument listing the catalog for an unknown name.
AttackOutcome run_attack(std::string_view name, std::uint64_t seed, const SimConfig& cfg = {});

/// One single-bit mutation of one honest message.
struct TamperCase {
  std::size_t event = 0;  // 0..3 for M1..M4
  std::size_t bit = 0;
  std::string field;      // field containing the bit, or "type"/"framing"
  bool receiver_rejected = false;
  std::string reason;
  bool keys_consistent = true;  // no two completed parties hold different keys
  bool prevented() const { return receiver_rejected && keys_consistent; }
};

/// Every single-bit flip of every honest M1..M4 wire byte, one fresh world
/// per case; with `every_bit` false, one rotating bit per byte. The parallel
/// version must equal the serial one.
std::vector<TamperCase> tamper_sweep_serial(std::uint64_t seed, const SimConfig& cfg, bool every_bit = true);
std::vector<TamperCase> tamper_sweep_parallel(std::uint64_t seed, const SimConfig& cfg, bool every_bit = true);

// Key-compromise cross-checks. These give the adversary long-term material,
// so they sit outside the network-only catalog.

struct StolenVerifierResult {
  bool gateway_accepted = false;   // the forged M1 passed every gateway check
  bool sensor_completed = false;
  bool attacker_has_sk = false;    // attacker-derived SK equals the sensor's
  Transcript transcript;
};
/// Attacker holds alice's gateway record (B, z), the SID and public X.
StolenVerifierResult stolen_verifier_impersonation(std::uint64_t seed, const SimConfig& cfg = {});

struct TranscriptDecryptResult {
  bool recovered = false;  // SK from {S, z} + transcript equals the parties' SK
  Transcript transcript;
};
/// Passive attacker holding S and alice's z decrypts e7 of an honest run.
TranscriptDecryptResult s_z_compromise(std::uint64_t seed, const SimConfig& cfg = {});

}  // namespace wsnake::simnet
