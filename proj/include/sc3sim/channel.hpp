#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "sc3sim/config.hpp"
#include "sc3sim/stats.hpp"

namespace sc3sim {

// Closed-form peak: channels * rate * width.
double peak_bandwidth(const ChannelConfig& cfg);

// Granularity-sized blocks round-robin across channels. Bijective.
struct InterleaveTarget {
  uint32_t channel;
  uint64_t local_addr;
};
InterleaveTarget interleave(const ChannelConfig& cfg, uint64_t addr);

// Timed external-memory channel set. Each channel is a FIFO; a request
// completes at max(arrival + fixed latency, previous completion + transfer
// time), with the transfer time set by the per-channel byte rate expressed
// in core cycles.
class ChannelSet {
 public:
  ChannelSet(const ChannelConfig& cfg, double core_frequency_hz);

  bool enabled() const { return cfg_.channels > 0; }
  const ChannelConfig& config() const { return cfg_; }

  struct Pending {
    uint64_t done_cycle;
    uint32_t seq;
    uint64_t addr;
    uint32_t bytes;
    bool write;
    uint16_t origin_pe;
    uint8_t origin_tid;
  };

  // Enqueue a transfer arriving at `now`; returns the completion cycle.
  uint64_t enqueue(uint64_t addr, uint32_t bytes, uint64_t now, bool write, uint16_t origin_pe,
                   uint8_t origin_tid);

  // Pop every transfer with done_cycle <= now, channel-major then FIFO order.
  std::vector<Pending> complete_due(uint64_t now);

  bool idle() const;
  const ChannelSetStats& stats() const { return stats_; }

 private:
  ChannelConfig cfg_;
  double bytes_per_cycle_;  // per channel
  std::vector<double> last_completion_;
  std::vector<std::deque<Pending>> queues_;
  uint32_t seq_ = 0;
  ChannelSetStats stats_;
};

}  // namespace sc3sim
