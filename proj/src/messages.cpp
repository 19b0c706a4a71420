#include "wsnake/messages.hpp"

namespace wsnake::protocol {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

GroupPoint finite_point(ByteView b, const CurveParams& curve) {
  auto p = decode_point(b, curve);
  if (p.is_infinity()) throw CodecError("point at infinity in message field");
  return p;
}

}  // namespace

MessageType type_of(const Message& m) {
  return std::visit(Overloaded{
                        [](const M1&) { return MessageType::kM1; },
                        [](const M2&) { return MessageType::kM2; },
                        [](const M3&) { return MessageType::kM3; },
                        [](const M4&) { return MessageType::kM4; },
                        [](const PC1&) { return MessageType::kPC1; },
                        [](const PC2&) { return MessageType::kPC2; },
                    },
                    m);
}

std::string_view type_name(MessageType t) {
  switch (t) {
    case MessageType::kM1: return "M1";
    case MessageType::kM2: return "M2";
    case MessageType::kM3: return "M3";
    case MessageType::kM4: return "M4";
    case MessageType::kPC1: return "PC1";
    case MessageType::kPC2: return "PC2";
  }
  return "?";
}

std::vector<FieldView> fields_of(const Message& m, const CurveParams& curve) {
  return std::visit(
      Overloaded{
          [&](const M1& x) {
            return std::vector<FieldView>{{"e1", encode_point(x.e1, curve)}, {"e3", x.e3.encode()}};
          },
          [&](const M2& x) {
            return std::vector<FieldView>{{"SP1", x.sp1.to_bytes()},
                                          {"SP2", x.sp2.to_bytes()},
                                          {"T2", u64_be(x.t2)},
                                          {"e5", encode_point(x.e5, curve)}};
          },
          [&](const M3& x) {
            return std::vector<FieldView>{
                {"e6", encode_point(x.e6, curve)}, {"GP", x.gp.to_bytes()}, {"T3", u64_be(x.t3)}};
          },
          [&](const M4& x) { return std::vector<FieldView>{{"e7", x.e7.encode()}}; },
          [&](const PC1& x) {
            return std::vector<FieldView>{{"e1", encode_point(x.e1, curve)}, {"e3", x.e3.encode()}};
          },
          [&](const PC2& x) { return std::vector<FieldView>{{"ct", x.ct.encode()}}; },
      },
      m);
}

Bytes encode(const Message& m, const CurveParams& curve) {
  Bytes out{static_cast<std::uint8_t>(type_of(m))};
  for (const auto& f : fields_of(m, curve)) put_lp(out, f.bytes);
  return out;
}

Message decode(ByteView wire, const CurveParams& curve) {
  Reader r(wire);
  const auto type = r.u8();
  Message out;
  switch (static_cast<MessageType>(type)) {
    case MessageType::kM1: {
      M1 m{finite_point(r.lp(), curve), {}};
      m.e3 = Ciphertext::decode(r.lp());
      out = std::move(m);
      break;
    }
    case MessageType::kM2: {
      M2 m;
      m.sp1 = r.lp_digest();
      m.sp2 = r.lp_digest();
      m.t2 = r.lp_u64();
      m.e5 = finite_point(r.lp(), curve);
      out = std::move(m);
      break;
    }
    case MessageType::kM3: {
      M3 m;
      m.e6 = finite_point(r.lp(), curve);
      m.gp = r.lp_digest();
      m.t3 = r.lp_u64();
      out = std::move(m);
      break;
    }
    case MessageType::kM4:
      out = M4{Ciphertext::decode(r.lp())};
      break;
    case MessageType::kPC1: {
      PC1 m{finite_point(r.lp(), curve), {}};
      m.e3 = Ciphertext::decode(r.lp());
      out = std::move(m);
      break;
    }
    case MessageType::kPC2:
      out = PC2{Ciphertext::decode(r.lp())};
      break;
    default:
      throw CodecError("unknown message type 0x" + to_hex(ByteView(&wire[0], 1)));
  }
  r.expect_done();
  return out;
}

}  // namespace wsnake::protocol
