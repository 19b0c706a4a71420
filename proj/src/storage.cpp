#include "wsnake/storage.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

namespace wsnake::storage {

namespace {

enum : std::uint8_t {
  kUser = 0x01,
  kSensor = 0x02,
  kPending = 0x03,
  kProvisioned = 0x04,
  kGatewayKey = 0x10,
  kCard = 0x21,
  kSensorKey = 0x31,
};

void put_record(Bytes& out, std::uint8_t type, const Bytes& value) {
  out.push_back(type);
  put_u32(out, static_cast<std::uint32_t>(value.size()));
  out.insert(out.end(), value.begin(), value.end());
}

void expect_magic(Reader& r, std::string_view magic) {
  auto head = r.take(magic.size());
  if (!std::equal(head.begin(), head.end(), magic.begin())) {
    throw CodecError("bad magic; expected " + std::string(magic));
  }
}

std::string as_string(ByteView b) { return std::string(b.begin(), b.end()); }

}  // namespace

Bytes serialize_gateway(const protocol::GatewayState& gw) {
  const auto& suite = gw.suite();
  Bytes out(kDbMagic.begin(), kDbMagic.end());
  put_record(out, kGatewayKey,
             frame({to_bytes(suite.ec().id()), to_bytes(hash_name(suite.hash_algo)),
                    gw.secret().encode(suite.ec())}));
  for (const auto& sid : gw.provisioned_sids()) put_record(out, kProvisioned, frame({sid}));
  for (const auto& [id, rec] : gw.users()) {
    put_record(out, kUser, frame({rec.id, rec.b.view(), rec.z.view()}));
    if (rec.pending_b) {
      put_record(out, kPending, frame({rec.id, rec.pending_b->view(), u64_be(rec.pending_deadline)}));
    }
  }
  for (const auto& [sid, as] : gw.sensors()) put_record(out, kSensor, frame({sid, as.view()}));
  return out;
}

protocol::GatewayState parse_gateway(ByteView data, protocol::Config config) {
  Reader r(data);
  expect_magic(r, kDbMagic);
  if (r.u8() != kGatewayKey) throw CodecError("gateway key record must come first");
  Reader key(r.take(r.u32()));
  protocol::Suite suite;
  suite.curve = &curve_by_name(as_string(key.lp()));
  suite.hash_algo = hash_by_name(as_string(key.lp()));
  Scalar secret = Scalar::decode(key.lp(), suite.ec());
  key.expect_done();
  protocol::GatewayState gw(suite, std::move(secret), config);

  std::map<Bytes, protocol::UserRecord> users;
  while (!r.done()) {
    const auto type = r.u8();
    Reader rec(r.take(r.u32()));
    switch (type) {
      case kUser: {
        protocol::UserRecord u;
        auto id = rec.lp();
        u.id.assign(id.begin(), id.end());
        u.b = rec.lp_digest();
        u.z = rec.lp_digest();
        if (!users.emplace(u.id, u).second) throw CodecError("duplicate user record");
        break;
      }
      case kPending: {
        auto id = rec.lp();
        auto it = users.find(Bytes(id.begin(), id.end()));
        if (it == users.end()) throw CodecError("pending-B record precedes its user record");
        it->second.pending_b = rec.lp_digest();
        it->second.pending_deadline = rec.lp_u64();
        break;
      }
      case kSensor: {
        auto sid = rec.lp();
        gw.restore_sensor(sid, rec.lp_digest());
        break;
      }
      case kProvisioned:
        gw.provision_sensor(rec.lp());
        break;
      default:
        throw CodecError("unknown record type " + std::to_string(type));
    }
    rec.expect_done();
  }
  for (auto& [id, u] : users) gw.restore_user(std::move(u));
  return gw;
}

Bytes serialize_card(const protocol::SmartCard& card) {
  Bytes out(kCardMagic.begin(), kCardMagic.end());
  put_record(out, kCard,
             frame({card.c.view(), card.d.view(), card.z.view(), card.q.view(), to_bytes(card.hash_id)}));
  return out;
}

protocol::SmartCard parse_card(ByteView data) {
  Reader r(data);
  expect_magic(r, kCardMagic);
  if (r.u8() != kCard) throw CodecError("not a smart-card record");
  Reader rec(r.take(r.u32()));
  protocol::SmartCard card;
  card.c = rec.lp_digest();
  card.d = rec.lp_digest();
  card.z = rec.lp_digest();
  card.q = rec.lp_digest();
  card.hash_id = as_string(rec.lp());
  rec.expect_done();
  r.expect_done();
  return card;
}

Bytes serialize_sensor(const protocol::SensorState& sensor) {
  Bytes out(kSensorMagic.begin(), kSensorMagic.end());
  put_record(out, kSensorKey, frame({sensor.sid, sensor.as.view()}));
  return out;
}

protocol::SensorState parse_sensor(ByteView data) {
  Reader r(data);
  expect_magic(r, kSensorMagic);
  if (r.u8() != kSensorKey) throw CodecError("not a sensor record");
  Reader rec(r.take(r.u32()));
  protocol::SensorState sensor;
  const auto sid = rec.lp();
  sensor.sid.assign(sid.begin(), sid.end());
  sensor.as = rec.lp_digest();
  rec.expect_done();
  r.expect_done();
  return sensor;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, ByteView data) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

FileLock::FileLock(const std::filesystem::path& path) {
  auto lock_path = path;
  lock_path += ".lock";
  fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0600);
  if (fd_ < 0) throw std::runtime_error("cannot open lock file: " + std::string(std::strerror(errno)));
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw std::runtime_error("gateway database " + path.string() + " is locked by another process");
  }
}

FileLock::~FileLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

}  // namespace wsnake::storage
