#include "wsnake/opcount.hpp"

namespace wsnake::opcount {

namespace {
thread_local OpCounts* active = nullptr;
}

CountingScope::CountingScope(OpCounts& sink) : previous_(active) { active = &sink; }
CountingScope::~CountingScope() { active = previous_; }

PauseScope::PauseScope() : previous_(active) { active = nullptr; }
PauseScope::~PauseScope() { active = previous_; }

void record_hash() {
  if (active) ++active->hash;
}
void record_aux_hash() {
  if (active) ++active->aux_hash;
}
void record_ecc() {
  if (active) ++active->ecc;
}
void record_sym() {
  if (active) ++active->sym;
}
void record_xor() {
  if (active) ++active->xorops;
}

}  // namespace wsnake::opcount
