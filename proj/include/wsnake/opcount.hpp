#pragma once

#include <cstdint>

// Instrumentation hooks called from the primitives. Counts go to whichever
// OpCounts is bound to the calling thread by a CountingScope; with no scope
// bound the hooks are no-ops.

namespace wsnake::opcount {

struct OpCounts {
  // Protocol-level operations, the ones priced in the cost model.
  std::uint64_t hash = 0;
  std::uint64_t ecc = 0;  // scalar multiplications
  std::uint64_t sym = 0;  // one per seal or open
  // Implementation overhead, reported separately.
  std::uint64_t aux_hash = 0;  // kdf_key / p2b derivations
  std::uint64_t xorops = 0;

  OpCounts& operator+=(const OpCounts& o) {
    hash += o.hash;
    ecc += o.ecc;
    sym += o.sym;
    aux_hash += o.aux_hash;
    xorops += o.xorops;
    return *this;
  }
  friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

/// Binds `sink` to the current thread for the scope's lifetime; nests.
class CountingScope {
 public:
  explicit CountingScope(OpCounts& sink);
  ~CountingScope();
  CountingScope(const CountingScope&) = delete;
  CountingScope& operator=(const CountingScope&) = delete;

 private:
  OpCounts* previous_;
};

/// Suspends counting (used for setup work such as key generation).
class PauseScope {
 public:
  PauseScope();
  ~PauseScope();
  PauseScope(const PauseScope&) = delete;
  PauseScope& operator=(const PauseScope&) = delete;

 private:
  OpCounts* previous_;
};

void record_hash();
void record_aux_hash();
void record_ecc();
void record_sym();
void record_xor();

}  // namespace wsnake::opcount
