#pragma once

#include <array>
#include <cstdint>

#include "sc3sim/config.hpp"
#include "sc3sim/stats.hpp"

namespace sc3sim {

// Closed-form peak: PE count x frequency x flops-per-cycle. Exactly
// multilinear; zero PE count gives zero.
double peak_flops(uint64_t pe_count, double frequency_hz, uint32_t flops_per_cycle);

struct PeakModel {
  uint64_t pe_count;
  double frequency_hz;
  std::array<uint32_t, 3> flops_per_cycle;  // dp, sp, hp

  double peak(int precision) const {
    return peak_flops(pe_count, frequency_hz, flops_per_cycle[precision]);
  }
};
PeakModel peak_model(const ChipConfig& cfg);

// min(peak, intensity * bandwidth)
double roofline(double intensity_flops_per_byte, double peak_flops_per_sec,
                double peak_bytes_per_sec);

struct EnergyReport {
  double energy_j;
  double power_w;
  double efficiency_achieved;  // achieved GFlops / W
  double efficiency_peak;      // peak GFlops / W (alternate reading, labeled)
};

// energy = static*time + sum(event counts x coefficients); power = energy/time.
// The per-FMA coefficient is charged per FMA-equivalent (2 flops).
// Throws std::invalid_argument on zero wall time.
EnergyReport energy_report(const RunStats& stats, const EnergyModel& model,
                           double peak_flops_dp);

// The measured full-chip DGEMM scenario at 800 MHz: 65.2% of the 13.1 TFlops
// peak over one second of simulated time, distributed evenly across PEs.
RunStats calibration_scenario();
inline constexpr double kMeasuredPowerW = 300.4;
inline constexpr double kMeasuredGflopsPerW = 28.45;

// Weak-scaled extrapolation from a homogeneous whole-city slice to a larger
// chip of the same shape. Work-proportional counters scale by the PE ratio;
// the result is marked extrapolated. Throws std::invalid_argument when the
// target is not an integer multiple of the slice or shapes differ.
RunStats extrapolate_full_chip(const RunStats& stats, const ChipConfig& from,
                               const ChipConfig& to);

struct SystemReport {
  uint64_t total_pes;
  double rpeak_tflops;  // at the config's frequency and DP flops-per-cycle
};
SystemReport system_arithmetic_checks(uint32_t nodes, uint32_t chips_per_node,
                                      const ChipConfig& cfg);

// Per-chip frequency implied by an aggregate Rpeak under the DP model.
double implied_frequency_hz(double rpeak_tflops, uint64_t total_chips, uint64_t pes_per_chip,
                            uint32_t flops_per_cycle_dp);

}  // namespace sc3sim
