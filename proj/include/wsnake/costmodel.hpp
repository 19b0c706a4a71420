#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wsnake/opcount.hpp"

namespace wsnake::costmodel {

/// Exact decimal seconds held as an integer count of nanoseconds.
class Seconds {
 public:
  static constexpr std::int64_t kScale = 1'000'000'000;

  constexpr Seconds() = default;
  static constexpr Seconds from_nanos(std::int64_t n) { return Seconds(n); }
  /// Parses "0.00032" style decimals; more than 9 fractional digits, signs,
  /// or exponents are rejected so no value is ever rounded.
  static Seconds parse(std::string_view text);

  std::int64_t nanos() const { return nanos_; }
  /// Fixed-point rendering with at least `places` decimals; widens rather
  /// than drop nonzero digits.
  std::string str(int places = 5) const;
  /// Shortest exact rendering ("0.1453").
  std::string str_exact() const;
  double as_double() const { return static_cast<double>(nanos_) / kScale; }

  Seconds operator+(Seconds o) const { return Seconds(nanos_ + o.nanos_); }
  Seconds operator*(std::uint64_t k) const { return Seconds(nanos_ * static_cast<std::int64_t>(k)); }
  friend auto operator<=>(const Seconds&, const Seconds&) = default;

 private:
  constexpr explicit Seconds(std::int64_t n) : nanos_(n) {}
  std::int64_t nanos_ = 0;
};

struct UnitCosts {
  Seconds t_h, t_ecc, t_sym;

  /// 0.00032 / 0.0171 / 0.0056 s on the reference 4-core 3.2 GHz CPU.
  static UnitCosts reference();
  /// Throws std::invalid_argument unless every unit is strictly positive.
  void validate() const;
};

struct RoleCounts {
  std::uint64_t h = 0, ecc = 0, sym = 0;
  // Overhead tallies; never priced.
  std::uint64_t aux_hash = 0, xorops = 0;

  static RoleCounts from(const opcount::OpCounts& c) { return {c.hash, c.ecc, c.sym, c.aux_hash, c.xorops}; }
  RoleCounts& operator+=(const RoleCounts& o);
  /// Compares only the priced counts.
  bool same_priced(const RoleCounts& o) const { return h == o.h && ecc == o.ecc && sym == o.sym; }
  friend bool operator==(const RoleCounts&, const RoleCounts&) = default;
};

struct CostProfile {
  RoleCounts user, gateway, sensor;

  RoleCounts total() const;
  friend bool operator==(const CostProfile&, const CostProfile&) = default;
};

struct SchemeProfile {
  std::string label;
  CostProfile profile;
};

Seconds cost(const RoleCounts& c, const UnitCosts& u);
/// Sum over roles of n_h*T_h + n_ecc*T_ecc + n_sym*T_sym.
Seconds total_cost(const CostProfile& p, const UnitCosts& u);

/// "3T_h + 2T_ecc + 2T_sym"; zero terms are omitted, all-zero gives "0".
std::string formula(const RoleCounts& c);

/// The four published comparison rows: [11], [13], [2], Ours.
std::vector<SchemeProfile> reference_schemes();
/// The "Ours" row on its own.
CostProfile proposed_scheme_counts();

struct TableRow {
  std::string label, user, gateway, sensor, total_formula;
  Seconds cost;
};

std::vector<TableRow> render_table(const std::vector<SchemeProfile>& schemes, const UnitCosts& u);
std::string table_text(const std::vector<TableRow>& rows);
nlohmann::json table_json(const std::vector<TableRow>& rows, const UnitCosts& u);
nlohmann::json profile_json(const CostProfile& p);

}  // namespace wsnake::costmodel
