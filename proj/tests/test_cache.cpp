#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sc3sim/cache.hpp"

using namespace sc3sim;
using sc3sim::testing::RefCache;

namespace {

CacheConfig small_cfg() {
  CacheConfig c;
  c.capacity = 1024;
  c.line_size = 64;
  c.assoc = 2;
  c.hit_latency = 2;
  return c;
}

}  // namespace

TEST_CASE("cold read misses, second read of the same line hits") {
  Cache c(small_cfg());
  CHECK_FALSE(c.access(0x1000, false));
  c.allocate(0x1000, nullptr, false);
  CHECK(c.access(0x1000, false));
  CHECK(c.hits() == 1);
  CHECK(c.misses() == 1);
}

TEST_CASE("lru eviction of a dirty way emits exactly one writeback") {
  CacheConfig cfg = small_cfg();  // 8 sets, 2 ways
  Cache c(cfg);
  // three lines mapping to set 0: line*8 sets apart
  const uint64_t a = 0, b = 64 * 8, d = 64 * 16;
  c.access(a, true);
  c.allocate(a, nullptr, true);  // dirty
  c.access(b, false);
  c.allocate(b, nullptr, false);
  auto ev = c.allocate(d, nullptr, false);  // evicts a (LRU, dirty)
  REQUIRE(ev.has_value());
  CHECK(ev->line_addr == a);
  CHECK(ev->dirty);
  CHECK(ev->data.size() == 64);
  CHECK(c.writebacks() == 1);
}

TEST_CASE("flush semantics: dirty writes back, clean drops, absent is a no-op") {
  Cache c(small_cfg());
  c.allocate(0x40, nullptr, false);
  uint8_t bytes[8] = {1, 2, 3, 4, 5, 6, 7, 8};
  c.store_into(0x40, 0, bytes, 8);

  auto fr = c.flush_line(0x40);
  CHECK(fr.present);
  CHECK(fr.was_dirty);
  REQUIRE(fr.data.size() == 64);
  CHECK(fr.data[0] == 1);
  CHECK_FALSE(c.contains(0x40));

  c.allocate(0x80, nullptr, false);
  fr = c.flush_line(0x80);
  CHECK(fr.present);
  CHECK_FALSE(fr.was_dirty);

  fr = c.flush_line(0xdead00);
  CHECK_FALSE(fr.present);
}

TEST_CASE("trace replay matches the brute-force reference model") {
  struct Geometry {
    uint64_t cap;
    uint32_t line, assoc;
  };
  const Geometry geos[] = {
      {2048, 64, 2}, {4096, 32, 4}, {65536, 64, 8}, {8192, 128, 1}, {4096, 64, 64},
  };
  std::mt19937_64 rng(7);
  for (const Geometry& g : geos) {
    CAPTURE(g.cap);
    CacheConfig cfg;
    cfg.capacity = g.cap;
    cfg.line_size = g.line;
    cfg.assoc = g.assoc;
    Cache real(cfg);
    RefCache ref(g.cap, g.line, g.assoc);
    for (int i = 0; i < 100000; i++) {
      const uint64_t addr = (rng() % (1 << 16)) & ~7ull;
      const bool write = rng() % 2;
      const auto want = ref.access(addr, write);
      const uint64_t line = real.line_of(addr);
      const bool hit = real.access(line, write);
      std::optional<uint64_t> wb;
      if (!hit) {
        auto ev = real.allocate(line, nullptr, write);
        if (ev && ev->dirty) wb = ev->line_addr;
      }
      REQUIRE(hit == want.hit);
      REQUIRE(wb == want.writeback);
    }
  }
}

TEST_CASE("drain enumerates exactly the dirty lines") {
  Cache c(small_cfg());
  c.allocate(0x000, nullptr, true);
  c.allocate(0x040, nullptr, false);
  c.allocate(0x080, nullptr, true);
  auto dirty = c.drain_dirty();
  REQUIRE(dirty.size() == 2);
  CHECK(dirty[0].line_addr == 0x000);
  CHECK(dirty[1].line_addr == 0x080);
  c.invalidate_all();
  CHECK_FALSE(c.contains(0x000));
}
