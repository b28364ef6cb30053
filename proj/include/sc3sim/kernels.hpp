#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sc3sim/chip.hpp"
#include "sc3sim/config.hpp"
#include "sc3sim/isa.hpp"
#include "sc3sim/stats.hpp"

namespace sc3sim {

// A generated kernel: assembly source plus input image and a pure oracle for
// the expected output. Expected output is independent of timing parameters
// for every race-free case.
struct KernelCase {
  std::string name;
  std::string source;  // generated assembly (also committed under kernels/)
  Program program;
  uint32_t threads_per_pe = 4;

  struct Region {
    uint64_t addr;
    std::vector<uint8_t> bytes;
  };
  std::vector<Region> inputs;
  std::vector<Region> expected;

  bool expect_watchdog = false;     // litmus no-flush: pinned outcome
  uint64_t watchdog_override = 0;   // 0 = config default
  uint64_t flops_dp_expected = 0;   // 0 = unchecked
};

// c[i] = a[i] + b[i] in DP. Two variants: single-group (4 threads/PE) and
// dual-group double-buffered via chg (8 threads/PE). n must divide evenly
// across the activated threads. `ones` fills a and b with 1.0 instead of
// seeded random values.
KernelCase gen_vecadd(uint64_t n, uint64_t seed, bool dual_group, uint32_t pe_count,
                      bool ones = false);

// Blocked DP DGEMM, row-major, C = A*B. A panels are staged to local
// storage in k-chunks of `tile`; accumulation order is k-innermost
// ascending with fused multiply-add, matching the triple-loop fma oracle
// bit-exactly. Requires m,n,k divisible by tile, 3*tile^2*8 <= 24 KiB, m
// divisible by the activated thread count, and the per-thread panel to fit
// its local-storage share.
KernelCase gen_dgemm(uint32_t m, uint32_t n, uint32_t k, uint32_t tile, uint64_t seed,
                     uint32_t pe_count);

// Message-passing litmus pair over the non-coherent hierarchy.
// first: MP-no-flush (pinned outcome: consumer spins forever on its stale
// cached flag, run ends by watchdog, result line untouched).
// second: MP-flushed (consumer always reads the new data).
std::pair<KernelCase, KernelCase> litmus_noncoherent(uint64_t data_value = 0xDEADBEEF);

struct CaseResult {
  bool passed = false;
  std::string message;
  bool watchdog_hit = false;
  RunStats stats;
};

CaseResult run_case(const ChipConfig& cfg, const KernelCase& kc, std::ostream* trace = nullptr);

// FNV-1a 64 over the expected regions (in order); hex string.
std::string expected_digest(const KernelCase& kc);

struct ManifestEntry {
  std::string name;
  std::string params_json;
  uint64_t seed = 0;
  std::string digest;
};

// The default suite for a config (work split depends on the PE count).
std::vector<KernelCase> default_suite(const ChipConfig& cfg);
std::string manifest_json(const std::vector<KernelCase>& cases,
                          const std::vector<std::string>& params);
std::vector<ManifestEntry> manifest_from_json(const std::string& text);

}  // namespace sc3sim
