#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sc3sim/isa.hpp"

namespace sc3sim {

struct PerPeStats {
  uint64_t issued = 0;
  uint64_t issue_cycles = 0;       // cycles with at least one issue
  uint64_t full_stall_cycles = 0;  // cycles with none; the two partition the run
  std::array<uint64_t, kClassCount> by_class{};
  std::array<uint64_t, 3> flops{};  // dp, sp, hp
  uint64_t l1d_hits = 0, l1d_misses = 0, l1d_writebacks = 0;
  uint64_t l1i_hits = 0, l1i_misses = 0;
  uint64_t local_accesses = 0;
  uint64_t sfu_ops = 0;
  uint64_t group_switches = 0;
  uint64_t barrier_wait_cycles = 0;  // thread-cycles spent at barriers

  PerPeStats& operator+=(const PerPeStats& o);
  bool operator==(const PerPeStats&) const = default;
};

struct CacheLevelStats {
  uint64_t hits = 0;
  uint64_t misses = 0;
  uint64_t writebacks_out = 0;   // dirty evictions + flush writebacks emitted
  uint64_t writeback_bytes_in = 0;  // bytes written into this level from above

  CacheLevelStats& operator+=(const CacheLevelStats& o);
  bool operator==(const CacheLevelStats&) const = default;
};

struct ChannelSetStats {
  uint64_t bytes_read = 0;
  uint64_t bytes_written = 0;
  uint64_t requests = 0;
  bool operator==(const ChannelSetStats&) const = default;
};

struct RunStats {
  uint32_t schema_version = 1;
  uint64_t cycles = 0;
  double frequency_hz = 0;
  double wall_seconds = 0;  // cycles / frequency
  bool extrapolated = false;

  std::vector<PerPeStats> per_pe;
  CacheLevelStats l1d, l1i, l2d, l2i, llc;  // aggregated over instances
  ChannelSetStats hbm2, ddr4;
  uint64_t barrier_releases = 0;

  // derived, filled by finalize()
  uint64_t total_issued = 0;
  std::array<uint64_t, kClassCount> total_by_class{};
  std::array<uint64_t, 3> total_flops{};
  std::array<double, 3> achieved_gflops{};
  double achieved_gflops_total = 0;
  double delivered_gbs = 0;  // external-memory bytes / wall seconds

  void finalize();
  bool operator==(const RunStats&) const = default;
};

}  // namespace sc3sim
