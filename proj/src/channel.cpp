#include "sc3sim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sc3sim {

double peak_bandwidth(const ChannelConfig& cfg) {
  return double(cfg.channels) * cfg.rate * double(cfg.width);
}

InterleaveTarget interleave(const ChannelConfig& cfg, uint64_t addr) {
  if (cfg.channels == 0) throw std::invalid_argument("interleave over a disabled channel set");
  const uint64_t g = cfg.interleave_granularity;
  const uint64_t block = addr / g;
  InterleaveTarget t;
  t.channel = static_cast<uint32_t>(block % cfg.channels);
  t.local_addr = (block / cfg.channels) * g + (addr % g);
  return t;
}

ChannelSet::ChannelSet(const ChannelConfig& cfg, double core_frequency_hz) : cfg_(cfg) {
  bytes_per_cycle_ =
      cfg.channels ? (cfg.rate * double(cfg.width)) / core_frequency_hz : 0.0;
  last_completion_.assign(cfg.channels, 0.0);
  queues_.resize(cfg.channels);
}

uint64_t ChannelSet::enqueue(uint64_t addr, uint32_t bytes, uint64_t now, bool write,
                             uint16_t origin_pe, uint8_t origin_tid) {
  const uint32_t ch = interleave(cfg_, addr).channel;
  const double transfer = double(bytes) / bytes_per_cycle_;
  const double done =
      std::max(double(now) + double(cfg_.fixed_latency), last_completion_[ch] + transfer);
  last_completion_[ch] = done;

  Pending p;
  p.done_cycle = static_cast<uint64_t>(std::ceil(done));
  p.seq = seq_++;
  p.addr = addr;
  p.bytes = bytes;
  p.write = write;
  p.origin_pe = origin_pe;
  p.origin_tid = origin_tid;
  queues_[ch].push_back(p);

  stats_.requests++;
  if (write)
    stats_.bytes_written += bytes;
  else
    stats_.bytes_read += bytes;
  return p.done_cycle;
}

std::vector<ChannelSet::Pending> ChannelSet::complete_due(uint64_t now) {
  std::vector<Pending> out;
  for (auto& q : queues_) {
    while (!q.empty() && q.front().done_cycle <= now) {
      out.push_back(q.front());
      q.pop_front();
    }
  }
  // Global completion order: by (done_cycle, seq) so that interleaved
  // channels retire deterministically and independent of channel count.
  std::sort(out.begin(), out.end(), [](const Pending& a, const Pending& b) {
    return a.done_cycle != b.done_cycle ? a.done_cycle < b.done_cycle : a.seq < b.seq;
  });
  return out;
}

bool ChannelSet::idle() const {
  for (const auto& q : queues_)
    if (!q.empty()) return false;
  return true;
}

}  // namespace sc3sim
