#include "sc3sim/stats.hpp"

namespace sc3sim {

PerPeStats& PerPeStats::operator+=(const PerPeStats& o) {
  issued += o.issued;
  issue_cycles += o.issue_cycles;
  full_stall_cycles += o.full_stall_cycles;
  for (int i = 0; i < kClassCount; i++) by_class[i] += o.by_class[i];
  for (int i = 0; i < 3; i++) flops[i] += o.flops[i];
  l1d_hits += o.l1d_hits;
  l1d_misses += o.l1d_misses;
  l1d_writebacks += o.l1d_writebacks;
  l1i_hits += o.l1i_hits;
  l1i_misses += o.l1i_misses;
  local_accesses += o.local_accesses;
  sfu_ops += o.sfu_ops;
  group_switches += o.group_switches;
  barrier_wait_cycles += o.barrier_wait_cycles;
  return *this;
}

CacheLevelStats& CacheLevelStats::operator+=(const CacheLevelStats& o) {
  hits += o.hits;
  misses += o.misses;
  writebacks_out += o.writebacks_out;
  writeback_bytes_in += o.writeback_bytes_in;
  return *this;
}

void RunStats::finalize() {
  wall_seconds = frequency_hz > 0 ? double(cycles) / frequency_hz : 0.0;
  total_issued = 0;
  total_by_class.fill(0);
  total_flops.fill(0);
  for (const PerPeStats& p : per_pe) {
    total_issued += p.issued;
    for (int i = 0; i < kClassCount; i++) total_by_class[i] += p.by_class[i];
    for (int i = 0; i < 3; i++) total_flops[i] += p.flops[i];
  }
  for (int i = 0; i < 3; i++)
    achieved_gflops[i] = wall_seconds > 0 ? double(total_flops[i]) / wall_seconds / 1e9 : 0.0;
  achieved_gflops_total = achieved_gflops[0] + achieved_gflops[1] + achieved_gflops[2];
  const uint64_t mem_bytes =
      hbm2.bytes_read + hbm2.bytes_written + ddr4.bytes_read + ddr4.bytes_written;
  delivered_gbs = wall_seconds > 0 ? double(mem_bytes) / wall_seconds / 1e9 : 0.0;
}

}  // namespace sc3sim
