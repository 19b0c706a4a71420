#include "wsnake/costmodel.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace wsnake::costmodel {

Seconds Seconds::parse(std::string_view text) {
  auto fail = [&] { return std::invalid_argument("not an exact decimal: '" + std::string(text) + "'"); };
  if (text.empty()) throw fail();
  const auto dot = text.find('.');
  const auto whole = text.substr(0, dot);
  const auto frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if ((whole.empty() && frac.empty()) || frac.size() > 9) throw fail();
  auto digits = [](std::string_view s) { return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }); };
  if (!digits(whole) || !digits(frac) || whole.size() > 9) throw fail();
  std::int64_t n = 0;
  for (char c : whole) n = n * 10 + (c - '0');
  n *= kScale;
  std::int64_t f = 0;
  for (std::size_t i = 0; i < 9; ++i) f = f * 10 + (i < frac.size() ? frac[i] - '0' : 0);
  return Seconds(n + f);
}

std::string Seconds::str(int places) const {
  if (places < 0 || places > 9) throw std::invalid_argument("places must be in [0, 9]");
  std::int64_t div = 1;
  for (int i = places; i < 9; ++i) div *= 10;
  while (nanos_ % div != 0) {
    div /= 10;
    ++places;
  }
  std::ostringstream os;
  os << nanos_ / kScale;
  if (places > 0) os << '.' << std::setw(places) << std::setfill('0') << (nanos_ % kScale) / div;
  return os.str();
}

std::string Seconds::str_exact() const {
  std::ostringstream os;
  os << nanos_ / kScale << '.' << std::setw(9) << std::setfill('0') << nanos_ % kScale;
  auto s = os.str();
  while (s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  return s;
}

UnitCosts UnitCosts::reference() {
  return {Seconds::parse("0.00032"), Seconds::parse("0.0171"), Seconds::parse("0.0056")};
}

void UnitCosts::validate() const {
  if (t_h.nanos() <= 0 || t_ecc.nanos() <= 0 || t_sym.nanos() <= 0) {
    throw std::invalid_argument("unit costs must be strictly positive");
  }
}

RoleCounts& RoleCounts::operator+=(const RoleCounts& o) {
  h += o.h;
  ecc += o.ecc;
  sym += o.sym;
  aux_hash += o.aux_hash;
  xorops += o.xorops;
  return *this;
}

RoleCounts CostProfile::total() const {
  RoleCounts t = user;
  t += gateway;
  t += sensor;
  return t;
}

Seconds cost(const RoleCounts& c, const UnitCosts& u) { return u.t_h * c.h + u.t_ecc * c.ecc + u.t_sym * c.sym; }

Seconds total_cost(const CostProfile& p, const UnitCosts& u) {
  return cost(p.user, u) + cost(p.gateway, u) + cost(p.sensor, u);
}

std::string formula(const RoleCounts& c) {
  std::string out;
  auto term = [&](std::uint64_t n, const char* unit) {
    if (n == 0) return;
    if (!out.empty()) out += " + ";
    out += std::to_string(n) + unit;
  };
  term(c.h, "T_h");
  term(c.ecc, "T_ecc");
  term(c.sym, "T_sym");
  return out.empty() ? "0" : out;
}

std::vector<SchemeProfile> reference_schemes() {
  return {
      {"[11]", {{1, 2, 0}, {4, 4, 0}, {3, 2, 0}}},
      {"[13]", {{6, 3, 0}, {6, 1, 1}, {4, 2, 1}}},
      {"[2]", {{5, 4, 2}, {5, 2, 2}, {3, 1, 0}}},
      {"Ours", proposed_scheme_counts()},
  };
}

CostProfile proposed_scheme_counts() { return {{3, 2, 2}, {4, 3, 2}, {3, 2, 0}}; }

std::vector<TableRow> render_table(const std::vector<SchemeProfile>& schemes, const UnitCosts& u) {
  std::vector<TableRow> rows;
  rows.reserve(schemes.size());
  for (const auto& s : schemes) {
    const auto& p = s.profile;
    rows.push_back({s.label, formula(p.user), formula(p.gateway), formula(p.sensor), formula(p.total()),
                    total_cost(p, u)});
  }
  return rows;
}

std::string table_text(const std::vector<TableRow>& rows) {
  std::vector<std::array<std::string, 6>> cells{{"Scheme", "User", "Gateway", "Sensor", "Total", "Cost (s)"}};
  for (const auto& r : rows) cells.push_back({r.label, r.user, r.gateway, r.sensor, r.total_formula, r.cost.str(5)});
  std::array<std::size_t, 6> width{};
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream os;
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << std::left << std::setw(static_cast<int>(width[i])) << row[i] << (i + 1 < row.size() ? "  " : "\n");
    }
  }
  return os.str();
}

nlohmann::json table_json(const std::vector<TableRow>& rows, const UnitCosts& u) {
  nlohmann::json out;
  out["units"] = {{"T_h", u.t_h.str_exact()}, {"T_ecc", u.t_ecc.str_exact()}, {"T_sym", u.t_sym.str_exact()}};
  out["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    out["rows"].push_back({{"scheme", r.label},
                           {"user", r.user},
                           {"gateway", r.gateway},
                           {"sensor", r.sensor},
                           {"total", r.total_formula},
                           {"cost", r.cost.str(5)}});
  }
  return out;
}

nlohmann::json profile_json(const CostProfile& p) {
  auto role = [](const RoleCounts& c) {
    return nlohmann::json{{"hash", c.h},
                          {"ecc", c.ecc},
                          {"sym", c.sym},
                          {"formula", formula(c)},
                          {"overhead", {{"aux_hash", c.aux_hash}, {"xor", c.xorops}}}};
  };
  return {{"user", role(p.user)}, {"gateway", role(p.gateway)}, {"sensor", role(p.sensor)}};
}

}  // namespace wsnake::costmodel
