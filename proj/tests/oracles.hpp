#pragma once

// Test-only reference models, kept independent of the implementation paths
// they check.

#include <cstdint>
#include <optional>
#include <vector>

namespace sc3sim::testing {

// Brute-force set-associative cache with true LRU and write-back/write-
// allocate, replaying an access trace with immediate allocation on miss.
class RefCache {
 public:
  RefCache(uint64_t capacity, uint32_t line, uint32_t assoc)
      : line_(line), assoc_(assoc), sets_(capacity / (uint64_t(line) * assoc)) {
    entries_.assign(sets_ * assoc_, {});
  }

  struct Outcome {
    bool hit;
    std::optional<uint64_t> writeback;  // dirty victim line address
  };

  Outcome access(uint64_t addr, bool write) {
    const uint64_t line_addr = addr / line_ * line_;
    const uint64_t set = (line_addr / line_) % sets_;
    const uint64_t tag = (line_addr / line_) / sets_;
    Entry* sete = entries_.data() + set * assoc_;
    for (uint32_t w = 0; w < assoc_; w++) {
      if (sete[w].valid && sete[w].tag == tag) {
        sete[w].stamp = ++tick_;
        if (write) sete[w].dirty = true;
        return {true, std::nullopt};
      }
    }
    // miss: pick first invalid way, else the least recently used
    int victim = -1;
    for (uint32_t w = 0; w < assoc_; w++)
      if (!sete[w].valid) {
        victim = int(w);
        break;
      }
    if (victim < 0) {
      uint64_t oldest = UINT64_MAX;
      for (uint32_t w = 0; w < assoc_; w++)
        if (sete[w].stamp < oldest) {
          oldest = sete[w].stamp;
          victim = int(w);
        }
    }
    std::optional<uint64_t> wb;
    if (sete[victim].valid && sete[victim].dirty)
      wb = (sete[victim].tag * sets_ + set) * line_;
    sete[victim] = {tag, true, write, ++tick_};
    return {false, wb};
  }

 private:
  struct Entry {
    uint64_t tag = 0;
    bool valid = false;
    bool dirty = false;
    uint64_t stamp = 0;
  };
  uint32_t line_;
  uint32_t assoc_;
  uint64_t sets_;
  std::vector<Entry> entries_;
  uint64_t tick_ = 0;
};

}  // namespace sc3sim::testing
