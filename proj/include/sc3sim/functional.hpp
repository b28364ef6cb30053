#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sc3sim/chip.hpp"
#include "sc3sim/config.hpp"
#include "sc3sim/isa.hpp"

namespace sc3sim {

// Functional reference emulator: same architectural semantics as the timing
// simulator, no caches and no timing. Threads execute round-robin in global
// thread-id order, one instruction per ready thread per round; chg gates
// group membership at round boundaries exactly like the cycle boundary rule.
// All memory effects are immediate and globally visible.

struct FunctionalThread {
  uint64_t pc = 0;
  std::array<uint64_t, kNumRegs> gpr{};
  std::array<uint64_t, kNumRegs> fpr{};
  ThreadStatus status = ThreadStatus::Halted;
  bool activated = false;
  uint32_t gtid = 0;
  SyncScope barrier_scope = SyncScope::City;
};

struct FunctionalResult {
  std::vector<FunctionalThread> threads;        // pe-major, 8 per PE
  std::vector<std::vector<uint8_t>> local;      // per PE
  std::vector<uint8_t> memory;
  std::array<uint64_t, 3> flops{};
  std::array<uint64_t, kClassCount> by_class{};
  uint64_t executed = 0;
  uint64_t rounds = 0;
};

// Throws SimError on architectural errors, deadlock or watchdog expiry
// (the watchdog limit is interpreted in rounds).
FunctionalResult run_functional(const ChipConfig& cfg, const Program& program,
                                const LaunchDescriptor& d);

}  // namespace sc3sim
