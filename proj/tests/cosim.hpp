#pragma once

// Random race-free SPMD program generator plus the timing-vs-functional
// equivalence check used by the unit tests and the acceptance suite.

#include <random>
#include <sstream>
#include <string>

#include "sc3sim/assembler.hpp"
#include "sc3sim/chip.hpp"
#include "sc3sim/functional.hpp"

namespace sc3sim::testing {

// Register conventions inside generated programs:
//   r1  global thread id (never clobbered)
//   r22 own global block base, r23 shared read-only base, r24 loop counter
//   r3..r15 integer scratch, f1..f15 FP scratch
struct CosimProgram {
  std::string source;
  Program program;
  uint32_t threads_per_pe;
  std::vector<uint8_t> shared_block;  // read-only input, placed at kSharedBase
};

inline constexpr uint64_t kOwnBase = 0x40000;    // per-thread 256 B blocks
inline constexpr uint64_t kSharedBase = 0x30000;  // shared read-only block

// A small config for co-simulation sweeps: one city, tight memory.
inline ChipConfig cosim_config() {
  ChipConfig cfg;
  cfg.prefectures = 1;
  cfg.cities_per_prefecture = 1;
  cfg.llc.capacity = 256 * 1024;
  cfg.memory_size = 512 * 1024;
  cfg.watchdog_cycles = 2'000'000;
  return cfg;
}

inline CosimProgram gen_cosim_program(uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int n) { return int(rng() % n); };

  CosimProgram out;
  out.threads_per_pe = 1 + pick(8);

  std::ostringstream s;
  s << ".text\n";
  // prologue: r22 = kOwnBase + gtid*256, r23 = kSharedBase
  s << "    addi r21, r0, 8\n";
  s << "    shl r22, r1, r21\n";
  s << "    lui r21, " << (kOwnBase >> 16) << "\n";
  s << "    add r22, r22, r21\n";
  s << "    lui r23, " << (kSharedBase >> 16) << "\n";

  const char* precs[3] = {".d", ".s", ".h"};
  int label_n = 0;
  const int segments = 4 + pick(10);
  for (int seg = 0; seg < segments; seg++) {
    switch (pick(10)) {
      case 0: case 1: {  // integer arithmetic burst
        const int len = 1 + pick(6);
        const char* ops[] = {"add", "sub", "and", "or", "xor", "shl", "shr", "slt"};
        for (int j = 0; j < len; j++)
          s << "    " << ops[pick(8)] << " r" << 3 + pick(13) << ", r" << pick(16) << ", r"
            << pick(16) << "\n";
        s << "    addi r" << 3 + pick(13) << ", r" << pick(16) << ", " << (pick(65536) - 32768)
          << "\n";
        break;
      }
      case 2: case 3: {  // FP burst at a random precision
        const int len = 1 + pick(5);
        const char* ops[] = {"fadd", "fsub", "fmul", "fmin", "fmax"};
        const char* p = precs[pick(3)];
        for (int j = 0; j < len; j++) {
          if (pick(3) == 0)
            s << "    fma" << p << " f" << 1 + pick(15) << ", f" << pick(16) << ", f" << pick(16)
              << ", f" << pick(16) << "\n";
          else
            s << "    " << ops[pick(5)] << p << " f" << 1 + pick(15) << ", f" << pick(16)
              << ", f" << pick(16) << "\n";
        }
        break;
      }
      case 4: {  // local storage traffic
        const int slot = pick(24 * 1024 / 8) * 8;
        if (pick(2))
          s << "    sls r" << 3 + pick(13) << ", " << slot << "(r0)\n";
        else
          s << "    lls f" << 1 + pick(15) << ", " << slot << "(r0)\n";
        break;
      }
      case 5: {  // own-block global traffic
        const int off8 = pick(32) * 8;
        switch (pick(4)) {
          case 0: s << "    sd r" << 3 + pick(13) << ", " << off8 << "(r22)\n"; break;
          case 1: s << "    sd f" << 1 + pick(15) << ", " << off8 << "(r22)\n"; break;
          case 2: s << "    ld r" << 3 + pick(13) << ", " << off8 << "(r22)\n"; break;
          default: s << "    ld f" << 1 + pick(15) << ", " << off8 << "(r22)\n"; break;
        }
        if (pick(2)) {
          const int off4 = pick(64) * 4;
          if (pick(2))
            s << "    sw r" << 3 + pick(13) << ", " << off4 << "(r22)\n";
          else
            s << "    lw r" << 3 + pick(13) << ", " << off4 << "(r22)\n";
        }
        break;
      }
      case 6: {  // shared read-only loads
        s << "    ld f" << 1 + pick(15) << ", " << pick(32) * 8 << "(r23)\n";
        s << "    lw r" << 3 + pick(13) << ", " << pick(64) * 4 << "(r23)\n";
        break;
      }
      case 7: {  // flush family over the own block
        if (pick(2)) {
          s << "    flush " << pick(32) * 8 << "(r22)\n";
        } else {
          s << "    addi r24, r0, 256\n";
          s << "    flushr r22, r24\n";
        }
        if (pick(3) == 0) s << "    l2flush " << pick(32) * 8 << "(r22)\n";
        break;
      }
      case 8: {  // bounded loop of safe ops
        const int trips = 1 + pick(4);
        const std::string l = "L" + std::to_string(label_n++);
        s << "    addi r24, r0, " << trips << "\n";
        s << l << ":\n";
        s << "    fadd.d f" << 1 + pick(15) << ", f" << pick(16) << ", f" << pick(16) << "\n";
        s << "    sd f" << 1 + pick(15) << ", " << pick(32) * 8 << "(r22)\n";
        s << "    addi r24, r24, -1\n";
        s << "    bne r24, r0, " << l << "\n";
        break;
      }
      default: {  // specials: sfu, tid, chg, sync, jal
        switch (pick(5)) {
          case 0:
            s << "    fdiv" << precs[pick(3)] << " f" << 1 + pick(15) << ", f" << pick(16)
              << ", f" << pick(16) << "\n";
            break;
          case 1:
            s << "    fsqrt" << precs[pick(3)] << " f" << 1 + pick(15) << ", f" << pick(16)
              << "\n";
            break;
          case 2: s << "    tid r" << 3 + pick(13) << "\n"; break;
          case 3: s << "    chg\n"; break;
          default: {
            const std::string l = "L" + std::to_string(label_n++);
            // barriers require every activated thread to arrive; with a live
            // second group that only happens after an explicit switch, so
            // barrier programs stay single-group
            if (out.threads_per_pe <= 4 && pick(2)) {
              s << "    sync" << (pick(2) ? ".city" : ".chip") << "\n";
            } else {
              s << "    jal r25, " << l << "\n";
              s << l << ":\n";
            }
            break;
          }
        }
        break;
      }
    }
  }
  s << "    flushr r22, r0\n";  // zero-length flush exercises the edge case
  s << "    addi r24, r0, 256\n";
  s << "    flushr r22, r24\n";
  s << "    halt\n";

  out.source = s.str();
  out.program = parse_assembly(out.source);
  out.shared_block.resize(256);
  for (auto& b : out.shared_block) b = uint8_t(rng());
  return out;
}

// Runs the program on the timing simulator and the functional reference and
// compares registers, local storage, flushed memory and operation counts.
// Returns an empty string on success, a description of the first divergence
// otherwise.
inline std::string cosim_compare(const ChipConfig& cfg, const CosimProgram& cp,
                                 int workers = 1) {
  LaunchDescriptor d;
  d.program = &cp.program;
  d.threads_per_pe = cp.threads_per_pe;
  d.arg_block = cp.shared_block;  // shared read-only input, identical both paths
  d.arg_base = kSharedBase;

  Chip chip(cfg);
  chip.set_workers(workers);
  chip.launch(d);
  RunStats stats;
  try {
    stats = chip.run();
  } catch (const SimError& e) {
    return std::string("timing simulator error: ") + e.what();
  }
  chip.drain_caches();

  FunctionalResult ref;
  try {
    ref = run_functional(cfg, cp.program, d);
  } catch (const SimError& e) {
    return std::string("functional emulator error: ") + e.what();
  }

  std::ostringstream err;
  for (uint32_t pe = 0; pe < chip.pe_count(); pe++) {
    for (uint32_t t = 0; t < 8; t++) {
      const ThreadContext& a = chip.thread(pe, t);
      const FunctionalThread& b = ref.threads[8 * pe + t];
      if (a.activated != b.activated) return "activation mismatch";
      if (!a.activated) continue;
      if (a.pc != b.pc) {
        err << "pc mismatch pe " << pe << " thread " << t;
        return err.str();
      }
      for (int r = 0; r < kNumRegs; r++) {
        if (a.gpr[r] != b.gpr[r]) {
          err << "gpr" << r << " mismatch pe " << pe << " thread " << t << ": 0x" << std::hex
              << a.gpr[r] << " vs 0x" << b.gpr[r];
          return err.str();
        }
        if (a.fpr[r] != b.fpr[r]) {
          err << "fpr" << r << " mismatch pe " << pe << " thread " << t << ": 0x" << std::hex
              << a.fpr[r] << " vs 0x" << b.fpr[r];
          return err.str();
        }
      }
    }
    if (chip.pe(pe).local != ref.local[pe]) {
      err << "local storage mismatch pe " << pe;
      return err.str();
    }
  }
  if (chip.memory() != ref.memory) {
    const auto& m1 = chip.memory();
    const auto& m2 = ref.memory;
    for (size_t i = 0; i < m1.size(); i++)
      if (m1[i] != m2[i]) {
        err << "memory mismatch at 0x" << std::hex << i;
        return err.str();
      }
  }
  if (stats.total_issued != ref.executed) {
    err << "instruction count mismatch: " << stats.total_issued << " vs " << ref.executed;
    return err.str();
  }
  for (int p = 0; p < 3; p++)
    if (stats.total_flops[p] != ref.flops[p]) {
      err << "flop count mismatch at precision " << p;
      return err.str();
    }
  for (int c = 0; c < kClassCount; c++)
    if (stats.total_by_class[c] != ref.by_class[c]) {
      err << "class count mismatch: " << instr_class_name(static_cast<InstrClass>(c));
      return err.str();
    }
  return "";
}

}  // namespace sc3sim::testing
