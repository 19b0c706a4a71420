#pragma once

#include <gmpxx.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "wsnake/bytes.hpp"

namespace wsnake {

using BigInt = mpz_class;

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Affine point or the point at infinity. Carries no curve reference;
/// every operation takes the CurveParams explicitly.
class GroupPoint {
 public:
  GroupPoint() = default;  // infinity
  GroupPoint(BigInt x, BigInt y) : coords_(Coords{std::move(x), std::move(y)}) {}

  static GroupPoint infinity() { return {}; }

  bool is_infinity() const { return !coords_.has_value(); }
  const BigInt& x() const;
  const BigInt& y() const;

  friend bool operator==(const GroupPoint& a, const GroupPoint& b);

 private:
  struct Coords {
    BigInt x, y;
  };
  std::optional<Coords> coords_;
};

/// Short-Weierstrass curve y^2 = x^3 + ax + b over F_p with generator G of
/// order n. Construction validates non-singularity, G on curve, n*G = O.
class CurveParams {
 public:
  CurveParams(std::string id, BigInt p, BigInt a, BigInt b, GroupPoint g, BigInt n);

  const std::string& id() const { return id_; }
  const BigInt& p() const { return p_; }
  const BigInt& a() const { return a_; }
  const BigInt& b() const { return b_; }
  const GroupPoint& generator() const { return g_; }
  const BigInt& order() const { return n_; }
  std::size_t field_bytes() const { return field_bytes_; }
  std::size_t scalar_bytes() const { return scalar_bytes_; }

  bool on_curve(const GroupPoint& pt) const;

 private:
  std::string id_;
  BigInt p_, a_, b_;
  GroupPoint g_;
  BigInt n_;
  std::size_t field_bytes_;
  std::size_t scalar_bytes_;
};

/// Integer in [0, n) for a given curve.
class Scalar {
 public:
  Scalar() = default;
  Scalar(BigInt v, const CurveParams& curve);

  const BigInt& value() const { return v_; }
  /// Fixed-width big-endian encoding, width = byte length of n.
  Bytes encode(const CurveParams& curve) const;
  static Scalar decode(ByteView b, const CurveParams& curve);

  friend bool operator==(const Scalar& a, const Scalar& b) { return a.v_ == b.v_; }

 private:
  BigInt v_;
};

/// p=17, a=2, b=2, G=(5,1); the group order is found by exhaustive enumeration.
const CurveParams& toy_curve();
/// NIST P-256.
const CurveParams& p256();
/// "toy" or "p256"; throws ValidationError otherwise.
const CurveParams& curve_by_name(std::string_view name);

/// Chord-and-tangent addition. Throws ValidationError if either input is off-curve.
GroupPoint point_add(const GroupPoint& p, const GroupPoint& q, const CurveParams& curve);
GroupPoint point_negate(const GroupPoint& p, const CurveParams& curve);
/// k*P by left-to-right double-and-add. Counts one EC multiplication.
GroupPoint scalar_mult(const Scalar& k, const GroupPoint& p, const CurveParams& curve);

/// Tag 0x00 for infinity, or 0x04 ‖ x ‖ y at fixed field width.
Bytes encode_point(const GroupPoint& p, const CurveParams& curve);
/// Inverse of encode_point; rejects malformed encodings and off-curve points.
GroupPoint decode_point(ByteView b, const CurveParams& curve);

Bytes bigint_to_fixed(const BigInt& v, std::size_t width);
BigInt bigint_from_bytes(ByteView b);
BigInt bigint_from_hex(std::string_view hex);

}  // namespace wsnake
