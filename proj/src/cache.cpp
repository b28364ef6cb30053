#include "sc3sim/cache.hpp"

#include <cstring>

namespace sc3sim {

Cache::Cache(const CacheConfig& cfg)
    : line_(cfg.line_size),
      assoc_(cfg.assoc),
      sets_(cfg.capacity / (uint64_t(cfg.line_size) * cfg.assoc)) {
  const size_t ways = sets_ * assoc_;
  tag_.assign(ways, 0);
  valid_.assign(ways, 0);
  dirty_.assign(ways, 0);
  stamp_.assign(ways, 0);
  data_.assign(ways * line_, 0);
}

int Cache::find_way(uint64_t set, uint64_t tag) const {
  const size_t base = set * assoc_;
  for (uint32_t w = 0; w < assoc_; w++)
    if (valid_[base + w] && tag_[base + w] == tag) return static_cast<int>(w);
  return -1;
}

bool Cache::access(uint64_t line_addr, bool write) {
  const uint64_t set = set_of(line_addr);
  const int w = find_way(set, tag_of(line_addr));
  if (w < 0) {
    misses_++;
    return false;
  }
  const size_t i = set * assoc_ + w;
  stamp_[i] = ++tick_;
  if (write) dirty_[i] = 1;
  hits_++;
  return true;
}

bool Cache::contains(uint64_t line_addr) const {
  return find_way(set_of(line_addr), tag_of(line_addr)) >= 0;
}

bool Cache::dirty(uint64_t line_addr) const {
  const uint64_t set = set_of(line_addr);
  const int w = find_way(set, tag_of(line_addr));
  return w >= 0 && dirty_[set * assoc_ + w];
}

uint8_t* Cache::bytes(uint64_t line_addr) {
  const uint64_t set = set_of(line_addr);
  const int w = find_way(set, tag_of(line_addr));
  if (w < 0) return nullptr;
  return data_.data() + (set * assoc_ + w) * line_;
}

const uint8_t* Cache::bytes(uint64_t line_addr) const {
  return const_cast<Cache*>(this)->bytes(line_addr);
}

std::optional<Cache::Eviction> Cache::allocate(uint64_t line_addr, const uint8_t* fill,
                                               bool dirty) {
  const uint64_t set = set_of(line_addr);
  const size_t base = set * assoc_;

  int victim = -1;
  for (uint32_t w = 0; w < assoc_; w++) {
    if (!valid_[base + w]) {
      victim = static_cast<int>(w);
      break;
    }
  }
  if (victim < 0) {
    uint64_t oldest = UINT64_MAX;
    for (uint32_t w = 0; w < assoc_; w++) {
      if (stamp_[base + w] < oldest) {
        oldest = stamp_[base + w];
        victim = static_cast<int>(w);
      }
    }
  }

  std::optional<Eviction> out;
  const size_t i = base + victim;
  if (valid_[i]) {
    Eviction ev;
    ev.line_addr = (tag_[i] * sets_ + set) * line_;
    ev.dirty = dirty_[i] != 0;
    if (ev.dirty) {
      ev.data.assign(data_.begin() + i * line_, data_.begin() + (i + 1) * line_);
      writebacks_++;
    }
    out = std::move(ev);
  }

  tag_[i] = tag_of(line_addr);
  valid_[i] = 1;
  dirty_[i] = dirty ? 1 : 0;
  stamp_[i] = ++tick_;
  if (fill)
    std::memcpy(data_.data() + i * line_, fill, line_);
  else
    std::memset(data_.data() + i * line_, 0, line_);
  return out;
}

bool Cache::write_back_into(uint64_t line_addr, const uint8_t* src) {
  const uint64_t set = set_of(line_addr);
  const int w = find_way(set, tag_of(line_addr));
  if (w < 0) return false;
  const size_t i = set * assoc_ + w;
  std::memcpy(data_.data() + i * line_, src, line_);
  dirty_[i] = 1;
  stamp_[i] = ++tick_;
  return true;
}

void Cache::store_into(uint64_t line_addr, uint32_t offset, const uint8_t* src, uint32_t n) {
  const uint64_t set = set_of(line_addr);
  const int w = find_way(set, tag_of(line_addr));
  if (w < 0) return;
  const size_t i = set * assoc_ + w;
  std::memcpy(data_.data() + i * line_ + offset, src, n);
  dirty_[i] = 1;
}

Cache::FlushResult Cache::flush_line(uint64_t line_addr) {
  FlushResult r;
  const uint64_t set = set_of(line_addr);
  const int w = find_way(set, tag_of(line_addr));
  if (w < 0) return r;
  const size_t i = set * assoc_ + w;
  r.present = true;
  if (dirty_[i]) {
    r.was_dirty = true;
    r.data.assign(data_.begin() + i * line_, data_.begin() + (i + 1) * line_);
    writebacks_++;
  }
  valid_[i] = 0;
  dirty_[i] = 0;
  return r;
}

std::vector<Cache::Eviction> Cache::drain_dirty() {
  std::vector<Eviction> out;
  for (uint64_t set = 0; set < sets_; set++) {
    for (uint32_t w = 0; w < assoc_; w++) {
      const size_t i = set * assoc_ + w;
      if (valid_[i] && dirty_[i]) {
        Eviction ev;
        ev.line_addr = (tag_[i] * sets_ + set) * line_;
        ev.dirty = true;
        ev.data.assign(data_.begin() + i * line_, data_.begin() + (i + 1) * line_);
        out.push_back(std::move(ev));
      }
    }
  }
  return out;
}

void Cache::invalidate_all() {
  std::fill(valid_.begin(), valid_.end(), 0);
  std::fill(dirty_.begin(), dirty_.end(), 0);
}

}  // namespace sc3sim
