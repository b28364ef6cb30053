#include "doctest.h"
#include "sc3sim/config.hpp"

using namespace sc3sim;

TEST_CASE("defaults describe the published chip") {
  const ChipConfig c = sc3_default();
  CHECK(c.pe_count() == 4096);
  CHECK(c.city_count() == 256);
  CHECK(c.frequency_hz == 1.2e9);
  CHECK(c.flops_per_cycle[0] == 4);
  CHECK(c.l1d.capacity == 2048);
  CHECK(c.l1i.capacity == 4096);
  CHECK(c.l2d.capacity == 65536);
  CHECK(c.l2i.capacity == 32768);
  CHECK(c.llc.capacity == 4u * 1024 * 1024);
  CHECK(c.local_storage_bytes == 24 * 1024);
  c.validate();
}

TEST_CASE("sc2 preset") {
  const ChipConfig c = sc2_preset();
  CHECK(c.pe_count() == 2048);
  CHECK(c.frequency_hz == 1.0e9);
  CHECK(c.flops_per_cycle == std::array<uint32_t, 3>{2, 4, 8});
  CHECK(c.ddr4.channels == 4);
  CHECK(c.hbm2.channels == 0);
  c.validate();
}

TEST_CASE("json round trip preserves every field") {
  ChipConfig c = sc3_default();
  c.prefectures = 2;
  c.frequency_hz = 0.9e9;
  c.ddr4_window = {0x100000, 0x200000};
  c.energy.static_w = 12.5;
  const std::string text = config_to_json_text(c);
  const ChipConfig d = config_from_json_text(text);
  CHECK(config_to_json_text(d) == text);
  CHECK(d.prefectures == 2);
  CHECK(d.ddr4_window == std::make_pair(uint64_t(0x100000), uint64_t(0x200000)));
}

TEST_CASE("partial json takes defaults") {
  const ChipConfig c = config_from_json_text(R"({"prefectures": 1, "cities_per_prefecture": 1})");
  CHECK(c.pe_count() == 4);
  CHECK(c.l1d.capacity == 2048);
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS(config_from_json_text(R"({"prefecture_count": 1})"));
  CHECK_THROWS(config_from_json_text(R"({"l1d": {"cap": 2048}})"));
}

TEST_CASE("validation failures") {
  ChipConfig c = sc3_default();
  c.cities_per_prefecture = 0;
  CHECK_THROWS(c.validate());
  c = sc3_default();
  c.l1d.line_size = 48;
  CHECK_THROWS(c.validate());
  c = sc3_default();
  c.l2d.line_size = 128;  // mixed line sizes
  CHECK_THROWS(c.validate());
  c = sc3_default();
  c.llc.capacity = 4 * 1024 * 1024 + 64;  // not divisible across prefectures
  CHECK_THROWS(c.validate());
  c = sc3_default();
  c.hbm2.channels = 0;
  c.ddr4.channels = 0;
  CHECK_THROWS(c.validate());
}
