#include "sc3sim/config.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace sc3sim {

using nlohmann::json;

namespace {

bool pow2(uint64_t x) { return x && (x & (x - 1)) == 0; }

}  // namespace

void CacheConfig::validate(const std::string& name) const {
  if (!pow2(line_size)) throw std::invalid_argument(name + ": line size must be a power of two");
  if (assoc == 0) throw std::invalid_argument(name + ": associativity must be positive");
  if (capacity == 0 || capacity % (uint64_t(line_size) * assoc) != 0)
    throw std::invalid_argument(name + ": capacity must be a positive multiple of line*assoc");
}

void ChannelConfig::validate(const std::string& name) const {
  if (channels == 0) return;  // disabled channel set
  if (rate <= 0 || width == 0)
    throw std::invalid_argument(name + ": rate and width must be positive");
  if (!pow2(interleave_granularity))
    throw std::invalid_argument(name + ": interleave granularity must be a power of two");
}

void ChipConfig::validate() const {
  if (prefectures == 0 || cities_per_prefecture == 0 || villages_per_city == 0 ||
      pes_per_village == 0)
    throw std::invalid_argument("topology counts must all be at least 1");
  if (frequency_hz <= 0) throw std::invalid_argument("frequency must be positive");
  for (auto f : flops_per_cycle)
    if (f == 0) throw std::invalid_argument("flops-per-cycle must be positive");
  l1d.validate("l1d");
  l1i.validate("l1i");
  l2d.validate("l2d");
  l2i.validate("l2i");
  llc.validate("llc");
  if (l1i.line_size != l1d.line_size || l2d.line_size != l1d.line_size ||
      l2i.line_size != l1d.line_size || llc.line_size != l1d.line_size)
    throw std::invalid_argument("all cache levels must share one line size");
  if (llc.capacity % prefectures != 0)
    throw std::invalid_argument("llc capacity must divide evenly across prefectures");
  CacheConfig slice = llc;
  slice.capacity = llc.capacity / prefectures;
  slice.validate("llc slice");
  hbm2.validate("hbm2");
  ddr4.validate("ddr4");
  pcie.validate("pcie");
  if (hbm2.channels == 0 && ddr4.channels == 0)
    throw std::invalid_argument("at least one external memory channel set is required");
  if ((hbm2.channels && hbm2.interleave_granularity < l1d.line_size) ||
      (ddr4.channels && ddr4.interleave_granularity < l1d.line_size))
    throw std::invalid_argument("interleave granularity must be >= line size");
  if (ddr4_window && ddr4.channels == 0)
    throw std::invalid_argument("ddr4 window requires ddr4 channels");
  if (issue_width == 0) throw std::invalid_argument("issue width must be positive");
  if (memory_size == 0) throw std::invalid_argument("memory size must be positive");
  if (ddr4_window) {
    auto [base, size] = *ddr4_window;
    if (base % l1d.line_size || size % l1d.line_size)
      throw std::invalid_argument("ddr4 window must be line aligned");
    if (base + size > memory_size) throw std::invalid_argument("ddr4 window out of range");
  }
  if (local_storage_bytes == 0 || local_storage_bytes % 8)
    throw std::invalid_argument("local storage must be a positive multiple of 8");
}

ChipConfig sc3_default() { return ChipConfig{}; }

ChipConfig sc2_preset() {
  ChipConfig c;
  c.prefectures = 16;  // 16*32*4*1 = 2048 PEs
  c.cities_per_prefecture = 32;
  c.villages_per_city = 4;
  c.pes_per_village = 1;
  c.frequency_hz = 1.0e9;
  c.flops_per_cycle = {2, 4, 8};
  c.ddr4 = ChannelConfig{"DDR4-3200", 4, 3.2e9, 8, 250, 256};
  c.hbm2 = ChannelConfig{"", 0, 0, 0, 0, 256};  // SC2 has no HBM2
  c.pcie = ChannelConfig{"PCIe Gen4", 32, 2.0e9, 1, 0, 256};
  return c;
}

ChipConfig sc3_calibrated_800mhz() {
  ChipConfig c;
  c.frequency_hz = 0.8e9;
  // Calibration splits the measured 300.4 W as 20% static; the rest is
  // carried by DP FMA energy at the measured DGEMM op rate.
  const double measured_w = 300.4;
  const double measured_gflops_per_w = 28.45;
  const double fma_per_sec = measured_gflops_per_w * measured_w * 1e9 / 2.0;
  c.energy.static_w = 0.2 * measured_w;
  c.energy.fma_j = {(measured_w - c.energy.static_w) / fma_per_sec, 0.0, 0.0};
  return c;
}

namespace {

void get(const json& j, const char* key, uint32_t& out) {
  if (j.contains(key)) out = j.at(key).get<uint32_t>();
}
void get(const json& j, const char* key, uint64_t& out) {
  if (j.contains(key)) out = j.at(key).get<uint64_t>();
}
void get(const json& j, const char* key, double& out) {
  if (j.contains(key)) out = j.at(key).get<double>();
}
void get(const json& j, const char* key, std::string& out) {
  if (j.contains(key)) out = j.at(key).get<std::string>();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
  }
}

CacheConfig cache_from_json(const json& j, CacheConfig def, const std::string& where) {
  check_keys(j, {"capacity", "line_size", "assoc", "hit_latency"}, where);
  get(j, "capacity", def.capacity);
  get(j, "line_size", def.line_size);
  get(j, "assoc", def.assoc);
  get(j, "hit_latency", def.hit_latency);
  return def;
}

json cache_to_json(const CacheConfig& c) {
  return json{{"capacity", c.capacity},
              {"line_size", c.line_size},
              {"assoc", c.assoc},
              {"hit_latency", c.hit_latency}};
}

ChannelConfig channel_from_json(const json& j, ChannelConfig def, const std::string& where) {
  check_keys(j, {"technology", "channels", "rate", "width", "fixed_latency",
                 "interleave_granularity"},
             where);
  get(j, "technology", def.technology);
  get(j, "channels", def.channels);
  get(j, "rate", def.rate);
  get(j, "width", def.width);
  get(j, "fixed_latency", def.fixed_latency);
  get(j, "interleave_granularity", def.interleave_granularity);
  return def;
}

json channel_to_json(const ChannelConfig& c) {
  return json{{"technology", c.technology}, {"channels", c.channels},
              {"rate", c.rate},             {"width", c.width},
              {"fixed_latency", c.fixed_latency},
              {"interleave_granularity", c.interleave_granularity}};
}

}  // namespace

ChipConfig config_from_json_text(const std::string& text) {
  json j = json::parse(text);
  ChipConfig c;
  check_keys(j,
             {"prefectures", "cities_per_prefecture", "villages_per_city", "pes_per_village",
              "frequency_hz", "flops_per_cycle", "l1d", "l1i", "l2d", "l2i", "llc", "hbm2",
              "ddr4", "pcie", "ddr4_window", "sfu_latency", "fp_latency", "alu_latency",
              "local_latency", "local_storage_bytes", "issue_width", "memory_size", "text_base",
              "watchdog_cycles", "energy"},
             "top level");
  get(j, "prefectures", c.prefectures);
  get(j, "cities_per_prefecture", c.cities_per_prefecture);
  get(j, "villages_per_city", c.villages_per_city);
  get(j, "pes_per_village", c.pes_per_village);
  get(j, "frequency_hz", c.frequency_hz);
  if (j.contains("flops_per_cycle")) {
    const json& f = j.at("flops_per_cycle");
    check_keys(f, {"dp", "sp", "hp"}, "flops_per_cycle");
    get(f, "dp", c.flops_per_cycle[0]);
    get(f, "sp", c.flops_per_cycle[1]);
    get(f, "hp", c.flops_per_cycle[2]);
  }
  if (j.contains("l1d")) c.l1d = cache_from_json(j.at("l1d"), c.l1d, "l1d");
  if (j.contains("l1i")) c.l1i = cache_from_json(j.at("l1i"), c.l1i, "l1i");
  if (j.contains("l2d")) c.l2d = cache_from_json(j.at("l2d"), c.l2d, "l2d");
  if (j.contains("l2i")) c.l2i = cache_from_json(j.at("l2i"), c.l2i, "l2i");
  if (j.contains("llc")) c.llc = cache_from_json(j.at("llc"), c.llc, "llc");
  if (j.contains("hbm2")) c.hbm2 = channel_from_json(j.at("hbm2"), c.hbm2, "hbm2");
  if (j.contains("ddr4")) c.ddr4 = channel_from_json(j.at("ddr4"), c.ddr4, "ddr4");
  if (j.contains("pcie")) c.pcie = channel_from_json(j.at("pcie"), c.pcie, "pcie");
  if (j.contains("ddr4_window")) {
    const json& w = j.at("ddr4_window");
    check_keys(w, {"base", "size"}, "ddr4_window");
    c.ddr4_window = {w.at("base").get<uint64_t>(), w.at("size").get<uint64_t>()};
  }
  get(j, "sfu_latency", c.sfu_latency);
  get(j, "fp_latency", c.fp_latency);
  get(j, "alu_latency", c.alu_latency);
  get(j, "local_latency", c.local_latency);
  get(j, "local_storage_bytes", c.local_storage_bytes);
  get(j, "issue_width", c.issue_width);
  get(j, "memory_size", c.memory_size);
  get(j, "text_base", c.text_base);
  get(j, "watchdog_cycles", c.watchdog_cycles);
  if (j.contains("energy")) {
    const json& e = j.at("energy");
    check_keys(e, {"static_w", "fma_j", "cache_access_j", "mem_byte_j"}, "energy");
    get(e, "static_w", c.energy.static_w);
    if (e.contains("fma_j")) {
      const json& f = e.at("fma_j");
      check_keys(f, {"dp", "sp", "hp"}, "fma_j");
      get(f, "dp", c.energy.fma_j[0]);
      get(f, "sp", c.energy.fma_j[1]);
      get(f, "hp", c.energy.fma_j[2]);
    }
    if (e.contains("cache_access_j")) {
      const json& f = e.at("cache_access_j");
      check_keys(f, {"l1", "l2", "llc"}, "cache_access_j");
      get(f, "l1", c.energy.cache_access_j[0]);
      get(f, "l2", c.energy.cache_access_j[1]);
      get(f, "llc", c.energy.cache_access_j[2]);
    }
    get(e, "mem_byte_j", c.energy.mem_byte_j);
  }
  c.validate();
  return c;
}

std::string config_to_json_text(const ChipConfig& c) {
  json j;
  j["prefectures"] = c.prefectures;
  j["cities_per_prefecture"] = c.cities_per_prefecture;
  j["villages_per_city"] = c.villages_per_city;
  j["pes_per_village"] = c.pes_per_village;
  j["frequency_hz"] = c.frequency_hz;
  j["flops_per_cycle"] = {{"dp", c.flops_per_cycle[0]},
                          {"sp", c.flops_per_cycle[1]},
                          {"hp", c.flops_per_cycle[2]}};
  j["l1d"] = cache_to_json(c.l1d);
  j["l1i"] = cache_to_json(c.l1i);
  j["l2d"] = cache_to_json(c.l2d);
  j["l2i"] = cache_to_json(c.l2i);
  j["llc"] = cache_to_json(c.llc);
  j["hbm2"] = channel_to_json(c.hbm2);
  j["ddr4"] = channel_to_json(c.ddr4);
  j["pcie"] = channel_to_json(c.pcie);
  if (c.ddr4_window)
    j["ddr4_window"] = {{"base", c.ddr4_window->first}, {"size", c.ddr4_window->second}};
  j["sfu_latency"] = c.sfu_latency;
  j["fp_latency"] = c.fp_latency;
  j["alu_latency"] = c.alu_latency;
  j["local_latency"] = c.local_latency;
  j["local_storage_bytes"] = c.local_storage_bytes;
  j["issue_width"] = c.issue_width;
  j["memory_size"] = c.memory_size;
  j["text_base"] = c.text_base;
  j["watchdog_cycles"] = c.watchdog_cycles;
  j["energy"] = {{"static_w", c.energy.static_w},
                 {"fma_j",
                  {{"dp", c.energy.fma_j[0]}, {"sp", c.energy.fma_j[1]}, {"hp", c.energy.fma_j[2]}}},
                 {"cache_access_j",
                  {{"l1", c.energy.cache_access_j[0]},
                   {"l2", c.energy.cache_access_j[1]},
                   {"llc", c.energy.cache_access_j[2]}}},
                 {"mem_byte_j", c.energy.mem_byte_j}};
  return j.dump(2) + "\n";
}

ChipConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json_text(text);
}

}  // namespace sc3sim
