#include "wsnake/curve.hpp"

#include "wsnake/opcount.hpp"

namespace wsnake {

namespace {

BigInt mod(const BigInt& v, const BigInt& m) {
  BigInt r = v % m;
  if (r < 0) r += m;
  return r;
}

BigInt inverse(const BigInt& v, const BigInt& m) {
  BigInt r;
  if (mpz_invert(r.get_mpz_t(), v.get_mpz_t(), m.get_mpz_t()) == 0) {
    throw ValidationError("element has no inverse");
  }
  return r;
}

std::size_t byte_length(const BigInt& v) { return (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8; }

// Group law without validation; callers guarantee on-curve inputs.
GroupPoint add_raw(const GroupPoint& p, const GroupPoint& q, const BigInt& m, const BigInt& a) {
  if (p.is_infinity()) return q;
  if (q.is_infinity()) return p;
  BigInt lambda;
  if (p.x() == q.x()) {
    if (mod(p.y() + q.y(), m) == 0) return GroupPoint::infinity();
    lambda = mod((3 * p.x() * p.x() + a) * inverse(mod(2 * p.y(), m), m), m);
  } else {
    lambda = mod((q.y() - p.y()) * inverse(mod(q.x() - p.x(), m), m), m);
  }
  BigInt x3 = mod(lambda * lambda - p.x() - q.x(), m);
  BigInt y3 = mod(lambda * (p.x() - x3) - p.y(), m);
  return {std::move(x3), std::move(y3)};
}

GroupPoint add_unchecked(const GroupPoint& p, const GroupPoint& q, const CurveParams& c) {
  return add_raw(p, q, c.p(), c.a());
}

GroupPoint mult_unchecked(const BigInt& k, const GroupPoint& p, const CurveParams& c) {
  GroupPoint acc;
  if (k == 0 || p.is_infinity()) return acc;
  for (auto bit = static_cast<long>(mpz_sizeinbase(k.get_mpz_t(), 2)) - 1; bit >= 0; --bit) {
    acc = add_unchecked(acc, acc, c);
    if (mpz_tstbit(k.get_mpz_t(), static_cast<mp_bitcnt_t>(bit))) acc = add_unchecked(acc, p, c);
  }
  return acc;
}

BigInt count_toy_order() {
  // Walk the generator's cyclic subgroup until it closes.
  const BigInt p = 17, a = 2;
  const GroupPoint g(5, 1);
  BigInt n = 1;
  GroupPoint acc = g;
  while (!acc.is_infinity()) {
    acc = add_raw(acc, g, p, a);
    ++n;
  }
  return n;
}

}  // namespace

const BigInt& GroupPoint::x() const {
  if (!coords_) throw ValidationError("point at infinity has no coordinates");
  return coords_->x;
}

const BigInt& GroupPoint::y() const {
  if (!coords_) throw ValidationError("point at infinity has no coordinates");
  return coords_->y;
}

bool operator==(const GroupPoint& a, const GroupPoint& b) {
  if (a.is_infinity() || b.is_infinity()) return a.is_infinity() == b.is_infinity();
  return a.coords_->x == b.coords_->x && a.coords_->y == b.coords_->y;
}

CurveParams::CurveParams(std::string id, BigInt p, BigInt a, BigInt b, GroupPoint g, BigInt n)
    : id_(std::move(id)),
      p_(std::move(p)),
      a_(mod(a, p_)),
      b_(mod(b, p_)),
      g_(std::move(g)),
      n_(std::move(n)),
      field_bytes_(byte_length(p_)),
      scalar_bytes_(byte_length(n_)) {
  if (mod(4 * a_ * a_ * a_ + 27 * b_ * b_, p_) == 0) throw ValidationError(id_ + ": singular curve");
  if (g_.is_infinity() || !on_curve(g_)) throw ValidationError(id_ + ": generator not on curve");
  if (!mult_unchecked(n_, g_, *this).is_infinity()) {
    throw ValidationError(id_ + ": n*G is not the point at infinity");
  }
}

bool CurveParams::on_curve(const GroupPoint& pt) const {
  if (pt.is_infinity()) return true;
  const auto& x = pt.x();
  const auto& y = pt.y();
  if (x < 0 || x >= p_ || y < 0 || y >= p_) return false;
  return mod(y * y - (x * x * x + a_ * x + b_), p_) == 0;
}

Scalar::Scalar(BigInt v, const CurveParams& curve) : v_(std::move(v)) {
  if (v_ < 0 || v_ >= curve.order()) throw ValidationError("scalar outside [0, n)");
}

Bytes Scalar::encode(const CurveParams& curve) const { return bigint_to_fixed(v_, curve.scalar_bytes()); }

Scalar Scalar::decode(ByteView b, const CurveParams& curve) {
  if (b.size() != curve.scalar_bytes()) throw CodecError("scalar encoding has wrong width");
  return Scalar(bigint_from_bytes(b), curve);
}

const CurveParams& toy_curve() {
  static const CurveParams curve("toy", 17, 2, 2, GroupPoint(5, 1), count_toy_order());
  return curve;
}

const CurveParams& p256() {
  static const CurveParams curve(
      "p256", bigint_from_hex("ffffffff00000001000000000000000000000000ffffffffffffffffffffffff"),
      bigint_from_hex("ffffffff00000001000000000000000000000000fffffffffffffffffffffffc"),
      bigint_from_hex("5ac635d8aa3a93e7b3ebbd55769886bc651d06b0cc53b0f63bce3c3e27d2604b"),
      GroupPoint(bigint_from_hex("6b17d1f2e12c4247f8bce6e563a440f277037d812deb33a0f4a13945d898c296"),
                 bigint_from_hex("4fe342e2fe1a7f9b8ee7eb4a7c0f9e162bce33576b315ececbb6406837bf51f5")),
      bigint_from_hex("ffffffff00000000ffffffffffffffffbce6faada7179e84f3b9cac2fc632551"));
  return curve;
}

const CurveParams& curve_by_name(std::string_view name) {
  if (name == "toy") return toy_curve();
  if (name == "p256" || name == "standard") return p256();
  throw ValidationError("unknown curve '" + std::string(name) + "' (expected toy or p256)");
}

GroupPoint point_add(const GroupPoint& p, const GroupPoint& q, const CurveParams& curve) {
  if (!curve.on_curve(p) || !curve.on_curve(q)) throw ValidationError("point not on curve");
  return add_unchecked(p, q, curve);
}

GroupPoint point_negate(const GroupPoint& p, const CurveParams& curve) {
  if (!curve.on_curve(p)) throw ValidationError("point not on curve");
  if (p.is_infinity()) return p;
  return {p.x(), mod(-p.y(), curve.p())};
}

GroupPoint scalar_mult(const Scalar& k, const GroupPoint& p, const CurveParams& curve) {
  if (!curve.on_curve(p)) throw ValidationError("point not on curve");
  opcount::record_ecc();
  return mult_unchecked(k.value(), p, curve);
}

Bytes encode_point(const GroupPoint& p, const CurveParams& curve) {
  if (p.is_infinity()) return Bytes{0x00};
  Bytes out{0x04};
  auto x = bigint_to_fixed(p.x(), curve.field_bytes());
  auto y = bigint_to_fixed(p.y(), curve.field_bytes());
  out.insert(out.end(), x.begin(), x.end());
  out.insert(out.end(), y.begin(), y.end());
  return out;
}

GroupPoint decode_point(ByteView b, const CurveParams& curve) {
  if (b.size() == 1 && b[0] == 0x00) return GroupPoint::infinity();
  const auto w = curve.field_bytes();
  if (b.size() != 1 + 2 * w || b[0] != 0x04) throw CodecError("malformed point encoding");
  GroupPoint pt(bigint_from_bytes(b.subspan(1, w)), bigint_from_bytes(b.subspan(1 + w, w)));
  if (!curve.on_curve(pt)) throw ValidationError("point not on curve");
  return pt;
}

Bytes bigint_to_fixed(const BigInt& v, std::size_t width) {
  if (v < 0) throw ValidationError("negative integer has no fixed-width encoding");
  Bytes out(width, 0);
  std::size_t count = 0;
  if (v != 0) {
    if (byte_length(v) > width) throw ValidationError("integer wider than encoding width");
    mpz_export(out.data() + width - byte_length(v), &count, 1, 1, 1, 0, v.get_mpz_t());
  }
  return out;
}

BigInt bigint_from_bytes(ByteView b) {
  BigInt v;
  if (!b.empty()) mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
  return v;
}

BigInt bigint_from_hex(std::string_view hex) { return BigInt(std::string(hex), 16); }

}  // namespace wsnake
