#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

namespace sc3sim {

struct CacheConfig {
  uint64_t capacity = 0;    // bytes
  uint32_t line_size = 64;  // bytes, power of two
  uint32_t assoc = 2;
  uint32_t hit_latency = 2;  // core cycles
  // write policy is fixed: write-back, write-allocate, true LRU

  void validate(const std::string& name) const;
};

struct ChannelConfig {
  std::string technology;   // label only
  uint32_t channels = 0;
  double rate = 0;          // transfers per second per channel
  uint32_t width = 0;       // bytes per transfer
  uint32_t fixed_latency = 0;          // core cycles
  uint64_t interleave_granularity = 256;  // bytes, power of two >= line size

  double peak_bytes_per_sec() const { return double(channels) * rate * double(width); }
  void validate(const std::string& name) const;
};

struct EnergyModel {
  double static_w = 0;
  std::array<double, 3> fma_j{};          // J per FMA op, by precision dp/sp/hp
  std::array<double, 3> cache_access_j{}; // J per access: L1, L2, LLC
  double mem_byte_j = 0;                  // J per external-memory byte
};

struct ChipConfig {
  uint32_t prefectures = 16;
  uint32_t cities_per_prefecture = 16;
  uint32_t villages_per_city = 4;
  uint32_t pes_per_village = 1;
  double frequency_hz = 1.2e9;
  std::array<uint32_t, 3> flops_per_cycle{4, 8, 16};  // dp, sp, hp

  CacheConfig l1d{2 * 1024, 64, 2, 2};
  CacheConfig l1i{4 * 1024, 64, 2, 2};
  CacheConfig l2d{64 * 1024, 64, 8, 14};
  CacheConfig l2i{32 * 1024, 64, 4, 14};
  CacheConfig llc{4 * 1024 * 1024, 64, 16, 40};  // capacity is the chip total,
                                                 // sliced evenly per prefecture

  ChannelConfig hbm2{"HBM2", 4, 2.4e9, 128, 150, 256};
  ChannelConfig ddr4{"DDR4-3200", 2, 3.2e9, 8, 250, 256};
  ChannelConfig pcie{"PCIe Gen4", 48, 2.0e9, 1, 0, 256};  // peak arithmetic only

  // Optional address window served by DDR4; everything else is HBM2-backed.
  std::optional<std::pair<uint64_t, uint64_t>> ddr4_window;  // base, size

  uint32_t sfu_latency = 16;  // cycles from grant to result
  uint32_t fp_latency = 4;
  uint32_t alu_latency = 1;
  uint32_t local_latency = 1;
  uint64_t local_storage_bytes = 24 * 1024;
  uint32_t issue_width = 2;

  uint64_t memory_size = 64ull << 20;
  uint64_t text_base = 0x1000;
  uint64_t watchdog_cycles = 10'000'000;

  EnergyModel energy;

  uint32_t pe_count() const {
    return prefectures * cities_per_prefecture * villages_per_city * pes_per_village;
  }
  uint32_t city_count() const { return prefectures * cities_per_prefecture; }
  uint32_t pes_per_city() const { return villages_per_city * pes_per_village; }

  void validate() const;  // throws std::invalid_argument
};

// Presets reproducing the published configurations.
ChipConfig sc3_default();
ChipConfig sc2_preset();
// SC3 at 800 MHz with the energy coefficients calibrated to the measured
// DGEMM power draw (see perf.hpp).
ChipConfig sc3_calibrated_800mhz();

// JSON round trip; missing fields take the defaults above. Unknown keys are
// rejected to keep config typos loud.
ChipConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ChipConfig& cfg);
ChipConfig load_config_file(const std::string& path);

}  // namespace sc3sim
