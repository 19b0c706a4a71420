#pragma once

#include <filesystem>

#include "wsnake/protocol.hpp"

// Gateway database: "WSNAKEP1" then TLV records (type u8, length u32 BE,
// value). Record values are lp-framed field lists:
//   0x10 gateway key   {curve id, hash id, enc(S)}     exactly one, first
//   0x01 user          {ID, B, z}
//   0x02 sensor        {SID, AS}
//   0x03 pending-B     {ID, pending B, deadline u64}
//   0x04 provisioned   {SID}
// Smart-card file: "WSNCARD1" then TLV 0x21 {C, D, z, q, hash id}.
// Sensor file: "WSNSENS1" then TLV 0x31 {SID, AS}.

namespace wsnake::storage {

inline constexpr std::string_view kDbMagic = "WSNAKEP1";
inline constexpr std::string_view kCardMagic = "WSNCARD1";
inline constexpr std::string_view kSensorMagic = "WSNSENS1";

Bytes serialize_gateway(const protocol::GatewayState& gw);
protocol::GatewayState parse_gateway(ByteView data, protocol::Config config = {});

Bytes serialize_card(const protocol::SmartCard& card);
protocol::SmartCard parse_card(ByteView data);

Bytes serialize_sensor(const protocol::SensorState& sensor);
protocol::SensorState parse_sensor(ByteView data);

Bytes read_file(const std::filesystem::path& path);
/// Writes via a temporary file and rename.
void write_file(const std::filesystem::path& path, ByteView data);

/// Exclusive advisory lock on `<path>.lock`, released on destruction.
/// Throws std::runtime_error if another process holds it.
class FileLock {
 public:
  explicit FileLock(const std::filesystem::path& path);
  ~FileLock();
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace wsnake::storage
