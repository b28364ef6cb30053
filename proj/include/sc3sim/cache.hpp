#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sc3sim/config.hpp"

namespace sc3sim {

// One cache instance: physically indexed tag array plus line data, true-LRU
// replacement, write-back/write-allocate. No instance ever reads another
// instance's state; software coherence lives entirely in flush/invalidate.
class Cache {
 public:
  explicit Cache(const CacheConfig& cfg);

  uint32_t line_size() const { return line_; }
  uint64_t line_of(uint64_t addr) const { return addr & ~uint64_t(line_ - 1); }

  // Probe for a line; on hit updates LRU and (for writes) the dirty bit and
  // bumps the hit counter, otherwise bumps the miss counter.
  bool access(uint64_t line_addr, bool write);

  // Lookup without any state change.
  bool contains(uint64_t line_addr) const;
  bool dirty(uint64_t line_addr) const;

  // Data window into a resident line; nullptr when absent.
  uint8_t* bytes(uint64_t line_addr);
  const uint8_t* bytes(uint64_t line_addr) const;

  struct Eviction {
    uint64_t line_addr;
    std::vector<uint8_t> data;  // only dirty victims carry data
    bool dirty;
  };

  // Install a line (fill or writeback allocation). The victim, if any, is
  // returned; dirty victims count as writebacks.
  std::optional<Eviction> allocate(uint64_t line_addr, const uint8_t* fill, bool dirty);

  // Apply a full-line writeback arriving from above: present lines take the
  // data and turn dirty (no hit/miss accounting); returns false when absent
  // so the caller can allocate instead.
  bool write_back_into(uint64_t line_addr, const uint8_t* src);

  // Store bytes into a resident line, marking it dirty. No accounting.
  void store_into(uint64_t line_addr, uint32_t offset, const uint8_t* src, uint32_t n);

  struct FlushResult {
    bool present = false;
    bool was_dirty = false;
    std::vector<uint8_t> data;  // dirty line payload to write back
  };

  // Write-back + invalidate semantics of flush: present+dirty lines hand
  // their bytes to the caller, counting a writeback; clean lines just drop.
  FlushResult flush_line(uint64_t line_addr);

  // Host-side drain support: enumerate dirty lines in (set, way) order.
  std::vector<Eviction> drain_dirty();
  void invalidate_all();

  uint64_t hits() const { return hits_; }
  uint64_t misses() const { return misses_; }
  uint64_t writebacks() const { return writebacks_; }
  void add_writeback_bytes_in(uint64_t n) { wb_bytes_in_ += n; }
  uint64_t writeback_bytes_in() const { return wb_bytes_in_; }

 private:
  int find_way(uint64_t set, uint64_t tag) const;
  uint64_t set_of(uint64_t line_addr) const { return (line_addr / line_) % sets_; }
  uint64_t tag_of(uint64_t line_addr) const { return (line_addr / line_) / sets_; }

  uint32_t line_;
  uint32_t assoc_;
  uint64_t sets_;
  std::vector<uint64_t> tag_;
  std::vector<uint8_t> valid_;
  std::vector<uint8_t> dirty_;
  std::vector<uint64_t> stamp_;
  std::vector<uint8_t> data_;
  uint64_t tick_ = 0;
  uint64_t hits_ = 0, misses_ = 0, writebacks_ = 0, wb_bytes_in_ = 0;
};

}  // namespace sc3sim
