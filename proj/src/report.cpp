#include "sc3sim/report.hpp"

#include <cinttypes>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "sc3sim/channel.hpp"
#include "sc3sim/perf.hpp"

namespace sc3sim {

using nlohmann::json;

namespace {

json cache_json(const CacheLevelStats& c) {
  return json{{"hits", c.hits},
              {"misses", c.misses},
              {"writebacks_out", c.writebacks_out},
              {"writeback_bytes_in", c.writeback_bytes_in}};
}

CacheLevelStats cache_from(const json& j) {
  CacheLevelStats c;
  c.hits = j.at("hits");
  c.misses = j.at("misses");
  c.writebacks_out = j.at("writebacks_out");
  c.writeback_bytes_in = j.at("writeback_bytes_in");
  return c;
}

json channel_json(const ChannelSetStats& c) {
  return json{{"bytes_read", c.bytes_read},
              {"bytes_written", c.bytes_written},
              {"requests", c.requests}};
}

ChannelSetStats channel_from(const json& j) {
  ChannelSetStats c;
  c.bytes_read = j.at("bytes_read");
  c.bytes_written = j.at("bytes_written");
  c.requests = j.at("requests");
  return c;
}

}  // namespace

std::string report_json(const RunStats& s) {
  json j;
  j["schema_version"] = s.schema_version;
  j["cycles"] = s.cycles;
  j["frequency_hz"] = s.frequency_hz;
  j["wall_seconds"] = s.wall_seconds;
  j["extrapolated"] = s.extrapolated;
  json pes = json::array();
  for (const PerPeStats& p : s.per_pe) {
    json e;
    e["issued"] = p.issued;
    e["issue_cycles"] = p.issue_cycles;
    e["full_stall_cycles"] = p.full_stall_cycles;
    json cls;
    for (int i = 0; i < kClassCount; i++)
      cls[instr_class_name(static_cast<InstrClass>(i))] = p.by_class[i];
    e["by_class"] = cls;
    e["flops"] = {{"dp", p.flops[0]}, {"sp", p.flops[1]}, {"hp", p.flops[2]}};
    e["l1d_hits"] = p.l1d_hits;
    e["l1d_misses"] = p.l1d_misses;
    e["l1d_writebacks"] = p.l1d_writebacks;
    e["l1i_hits"] = p.l1i_hits;
    e["l1i_misses"] = p.l1i_misses;
    e["local_accesses"] = p.local_accesses;
    e["sfu_ops"] = p.sfu_ops;
    e["group_switches"] = p.group_switches;
    e["barrier_wait_cycles"] = p.barrier_wait_cycles;
    pes.push_back(std::move(e));
  }
  j["per_pe"] = std::move(pes);
  j["caches"] = {{"l1d", cache_json(s.l1d)},
                 {"l1i", cache_json(s.l1i)},
                 {"l2d", cache_json(s.l2d)},
                 {"l2i", cache_json(s.l2i)},
                 {"llc", cache_json(s.llc)}};
  j["channels"] = {{"hbm2", channel_json(s.hbm2)}, {"ddr4", channel_json(s.ddr4)}};
  j["barrier_releases"] = s.barrier_releases;
  j["derived"] = {{"total_issued", s.total_issued},
                  {"achieved_gflops",
                   {{"dp", s.achieved_gflops[0]},
                    {"sp", s.achieved_gflops[1]},
                    {"hp", s.achieved_gflops[2]},
                    {"total", s.achieved_gflops_total}}},
                  {"delivered_gbs", s.delivered_gbs}};
  return j.dump(2) + "\n";
}

RunStats stats_from_json(const std::string& text) {
  json j = json::parse(text);
  RunStats s;
  s.schema_version = j.at("schema_version");
  if (s.schema_version != 1) throw std::invalid_argument("unsupported report schema version");
  s.cycles = j.at("cycles");
  s.frequency_hz = j.at("frequency_hz");
  s.extrapolated = j.at("extrapolated");
  for (const json& e : j.at("per_pe")) {
    PerPeStats p;
    p.issued = e.at("issued");
    p.issue_cycles = e.at("issue_cycles");
    p.full_stall_cycles = e.at("full_stall_cycles");
    for (int i = 0; i < kClassCount; i++)
      p.by_class[i] = e.at("by_class").at(instr_class_name(static_cast<InstrClass>(i)));
    p.flops[0] = e.at("flops").at("dp");
    p.flops[1] = e.at("flops").at("sp");
    p.flops[2] = e.at("flops").at("hp");
    p.l1d_hits = e.at("l1d_hits");
    p.l1d_misses = e.at("l1d_misses");
    p.l1d_writebacks = e.at("l1d_writebacks");
    p.l1i_hits = e.at("l1i_hits");
    p.l1i_misses = e.at("l1i_misses");
    p.local_accesses = e.at("local_accesses");
    p.sfu_ops = e.at("sfu_ops");
    p.group_switches = e.at("group_switches");
    p.barrier_wait_cycles = e.at("barrier_wait_cycles");
    s.per_pe.push_back(p);
  }
  s.l1d = cache_from(j.at("caches").at("l1d"));
  s.l1i = cache_from(j.at("caches").at("l1i"));
  s.l2d = cache_from(j.at("caches").at("l2d"));
  s.l2i = cache_from(j.at("caches").at("l2i"));
  s.llc = cache_from(j.at("caches").at("llc"));
  s.hbm2 = channel_from(j.at("channels").at("hbm2"));
  s.ddr4 = channel_from(j.at("channels").at("ddr4"));
  s.barrier_releases = j.at("barrier_releases");
  s.finalize();
  return s;
}

std::string report_csv(const RunStats& s) {
  std::ostringstream out;
  out << "pe,issued,issue_cycles,full_stall_cycles";
  for (int i = 0; i < kClassCount; i++) out << "," << instr_class_name(static_cast<InstrClass>(i));
  out << ",flops_dp,flops_sp,flops_hp,l1d_hits,l1d_misses,l1d_writebacks,l1i_hits,l1i_misses,"
         "local_accesses,sfu_ops,group_switches,barrier_wait_cycles\n";
  auto row = [&](const std::string& name, const PerPeStats& p) {
    out << name << "," << p.issued << "," << p.issue_cycles << "," << p.full_stall_cycles;
    for (int i = 0; i < kClassCount; i++) out << "," << p.by_class[i];
    out << "," << p.flops[0] << "," << p.flops[1] << "," << p.flops[2] << "," << p.l1d_hits << ","
        << p.l1d_misses << "," << p.l1d_writebacks << "," << p.l1i_hits << "," << p.l1i_misses
        << "," << p.local_accesses << "," << p.sfu_ops << "," << p.group_switches << ","
        << p.barrier_wait_cycles << "\n";
  };
  PerPeStats total;
  for (size_t i = 0; i < s.per_pe.size(); i++) {
    row(std::to_string(i), s.per_pe[i]);
    total += s.per_pe[i];
  }
  row("total", total);
  return out.str();
}

std::string report_human(const RunStats& s, const ChipConfig& cfg) {
  const PeakModel pm = peak_model(cfg);
  char buf[256];
  std::ostringstream out;
  out << (s.extrapolated ? "run report (model-derived extrapolation)\n" : "run report\n");
  std::snprintf(buf, sizeof buf, "  cycles            %" PRIu64 "\n", s.cycles);
  out << buf;
  std::snprintf(buf, sizeof buf, "  wall time         %.9f s at %.0f MHz\n", s.wall_seconds,
                s.frequency_hz / 1e6);
  out << buf;
  std::snprintf(buf, sizeof buf, "  instructions      %" PRIu64 "\n", s.total_issued);
  out << buf;
  std::snprintf(buf, sizeof buf, "  flops             dp %" PRIu64 "  sp %" PRIu64 "  hp %" PRIu64
                                 "\n",
                s.total_flops[0], s.total_flops[1], s.total_flops[2]);
  out << buf;
  std::snprintf(buf, sizeof buf, "  peak              %.1f TFlops dp / %.1f TFlops sp / %.1f "
                                 "TFlops hp\n",
                pm.peak(0) / 1e12, pm.peak(1) / 1e12, pm.peak(2) / 1e12);
  out << buf;
  std::snprintf(buf, sizeof buf, "  achieved          %.3f GFlops (dp %.3f, sp %.3f, hp %.3f)\n",
                s.achieved_gflops_total, s.achieved_gflops[0], s.achieved_gflops[1],
                s.achieved_gflops[2]);
  out << buf;
  const double eff =
      pm.peak(0) > 0 ? 100.0 * s.achieved_gflops_total * 1e9 / pm.peak(0) : 0.0;
  std::snprintf(buf, sizeof buf, "  efficiency        %.1f%% of dp peak\n", eff);
  out << buf;
  std::snprintf(buf, sizeof buf, "  memory traffic    %.3f GB/s delivered\n", s.delivered_gbs);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "  caches            l1d %" PRIu64 "/%" PRIu64 " l2d %" PRIu64 "/%" PRIu64
                " llc %" PRIu64 "/%" PRIu64 " (hits/misses)\n",
                s.l1d.hits, s.l1d.misses, s.l2d.hits, s.l2d.misses, s.llc.hits, s.llc.misses);
  out << buf;
  std::snprintf(buf, sizeof buf, "  barrier releases  %" PRIu64 "\n", s.barrier_releases);
  out << buf;
  return out.str();
}

void emit_report(const RunStats& stats, const ChipConfig& cfg, ReportFormat fmt,
                 std::ostream& out) {
  switch (fmt) {
    case ReportFormat::Json: out << report_json(stats); break;
    case ReportFormat::Csv: out << report_csv(stats); break;
    case ReportFormat::Human: out << report_human(stats, cfg); break;
  }
}

}  // namespace sc3sim
