#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace wsnake {

/// Why a protocol party refused a message. Each value is a distinct,
/// reportable outcome.
enum class RejectReason {
  kMalformed,          // codec or field-shape failure
  kDecryptFailed,      // AE authentication failure (silent drop)
  kStale,              // timestamp outside the freshness window
  kReplay,             // (B, T1) already in the gateway replay cache
  kUnknownUser,        // B matches no (live) user record
  kUnknownSensor,      // SID not registered: routing rejection
  kGatewayAuth,        // SP2 or returned B failed to verify
  kSensorAuth,         // GP failed to verify
  kLoginFailed,        // smart-card D check failed
  kNoPendingSession,   // message arrived with no context to consume it
};

std::string_view reason_name(RejectReason r);

struct Rejection {
  RejectReason reason;
  std::string detail;
};

class BadResultAccess : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Value or Rejection. Rejections are expected outcomes, so they are not
/// exceptions; programming errors still throw.
template <class T>
class Result {
 public:
  Result(T value) : v_(std::move(value)) {}  // NOLINT(google-explicit-constructor)
  Result(Rejection r) : v_(std::move(r)) {}  // NOLINT(google-explicit-constructor)

  bool ok() const { return v_.index() == 0; }
  explicit operator bool() const { return ok(); }

  T& value() & {
    check();
    return std::get<0>(v_);
  }
  const T& value() const& {
    check();
    return std::get<0>(v_);
  }
  T&& value() && {
    check();
    return std::get<0>(std::move(v_));
  }
  const Rejection& error() const {
    if (ok()) throw BadResultAccess("result holds a value");
    return std::get<1>(v_);
  }
  RejectReason reason() const { return error().reason; }

 private:
  void check() const {
    if (!ok()) {
      const auto& r = std::get<1>(v_);
      throw BadResultAccess("rejected: " + std::string(reason_name(r.reason)) + ": " + r.detail);
    }
  }

  std::variant<T, Rejection> v_;
};

inline Rejection reject(RejectReason r, std::string detail = {}) { return {r, std::move(detail)}; }

}  // namespace wsnake
