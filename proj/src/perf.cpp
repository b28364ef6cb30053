#include "sc3sim/perf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sc3sim {

double peak_flops(uint64_t pe_count, double frequency_hz, uint32_t flops_per_cycle) {
  return double(pe_count) * frequency_hz * double(flops_per_cycle);
}

PeakModel peak_model(const ChipConfig& cfg) {
  return PeakModel{cfg.pe_count(), cfg.frequency_hz, cfg.flops_per_cycle};
}

double roofline(double intensity, double peak, double bandwidth) {
  if (intensity < 0) throw std::invalid_argument("negative arithmetic intensity");
  return std::min(peak, intensity * bandwidth);
}

EnergyReport energy_report(const RunStats& stats, const EnergyModel& model,
                           double peak_flops_dp) {
  if (stats.wall_seconds <= 0) throw std::invalid_argument("energy report needs nonzero time");
  double energy = model.static_w * stats.wall_seconds;
  for (int p = 0; p < 3; p++) energy += model.fma_j[p] * (double(stats.total_flops[p]) / 2.0);
  const uint64_t l1 = stats.l1d.hits + stats.l1d.misses + stats.l1i.hits + stats.l1i.misses;
  const uint64_t l2 = stats.l2d.hits + stats.l2d.misses + stats.l2i.hits + stats.l2i.misses;
  const uint64_t llc = stats.llc.hits + stats.llc.misses;
  energy += model.cache_access_j[0] * double(l1);
  energy += model.cache_access_j[1] * double(l2);
  energy += model.cache_access_j[2] * double(llc);
  const uint64_t mem_bytes = stats.hbm2.bytes_read + stats.hbm2.bytes_written +
                             stats.ddr4.bytes_read + stats.ddr4.bytes_written;
  energy += model.mem_byte_j * double(mem_bytes);

  EnergyReport r;
  r.energy_j = energy;
  r.power_w = energy / stats.wall_seconds;
  r.efficiency_achieved = stats.achieved_gflops_total / r.power_w;
  r.efficiency_peak = (peak_flops_dp / 1e9) / r.power_w;
  return r;
}

RunStats calibration_scenario() {
  // achieved flops pinned by the two published numbers: 28.45 GFlops/W at
  // 300.4 W, i.e. 8546.378 GFlops = 65.2% of the 13.1 TFlops peak at 800 MHz
  const uint64_t total_flops = uint64_t(kMeasuredGflopsPerW * kMeasuredPowerW * 1e9);
  const uint32_t npes = 4096;

  RunStats s;
  s.frequency_hz = 0.8e9;
  s.cycles = uint64_t(s.frequency_hz);  // one second of simulated time
  s.extrapolated = true;
  s.per_pe.resize(npes);
  const uint64_t per = total_flops / npes;
  uint64_t rem = total_flops % npes;
  for (uint32_t i = 0; i < npes; i++) {
    s.per_pe[i].flops[0] = per + (i < rem ? 1 : 0);
    s.per_pe[i].by_class[static_cast<int>(InstrClass::Fp)] = s.per_pe[i].flops[0] / 2;
    s.per_pe[i].issued = s.per_pe[i].by_class[static_cast<int>(InstrClass::Fp)];
    s.per_pe[i].issue_cycles = s.cycles;
  }
  s.finalize();
  return s;
}

RunStats extrapolate_full_chip(const RunStats& stats, const ChipConfig& from,
                               const ChipConfig& to) {
  if (from.villages_per_city != to.villages_per_city ||
      from.pes_per_village != to.pes_per_village)
    throw std::invalid_argument("extrapolation requires identical city shape");
  if (from.frequency_hz != to.frequency_hz)
    throw std::invalid_argument("extrapolation requires equal frequencies");
  const uint64_t from_pes = from.pe_count();
  const uint64_t to_pes = to.pe_count();
  if (from_pes == 0 || to_pes % from_pes != 0)
    throw std::invalid_argument("target is not a whole multiple of the slice");
  const uint64_t r = to_pes / from_pes;

  RunStats out = stats;
  out.extrapolated = true;
  out.per_pe.clear();
  out.per_pe.reserve(stats.per_pe.size() * r);
  for (uint64_t k = 0; k < r; k++)
    for (const PerPeStats& p : stats.per_pe) out.per_pe.push_back(p);

  auto scale_cache = [&](CacheLevelStats& c) {
    c.hits *= r;
    c.misses *= r;
    c.writebacks_out *= r;
    c.writeback_bytes_in *= r;
  };
  scale_cache(out.l1d);
  scale_cache(out.l1i);
  scale_cache(out.l2d);
  scale_cache(out.l2i);
  scale_cache(out.llc);
  out.hbm2.bytes_read *= r;
  out.hbm2.bytes_written *= r;
  out.hbm2.requests *= r;
  out.ddr4.bytes_read *= r;
  out.ddr4.bytes_written *= r;
  out.ddr4.requests *= r;
  out.barrier_releases *= r;
  out.finalize();
  return out;
}

SystemReport system_arithmetic_checks(uint32_t nodes, uint32_t chips_per_node,
                                      const ChipConfig& cfg) {
  SystemReport r;
  r.total_pes = uint64_t(nodes) * chips_per_node * cfg.pe_count();
  r.rpeak_tflops = peak_flops(r.total_pes, cfg.frequency_hz, cfg.flops_per_cycle[0]) / 1e12;
  return r;
}

double implied_frequency_hz(double rpeak_tflops, uint64_t total_chips, uint64_t pes_per_chip,
                            uint32_t flops_per_cycle_dp) {
  return rpeak_tflops * 1e12 / (double(total_chips) * double(pes_per_chip) * flops_per_cycle_dp);
}

}  // namespace sc3sim
