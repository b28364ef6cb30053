#include <sstream>

#include "doctest.h"
#include "sc3sim/report.hpp"

using namespace sc3sim;

namespace {

RunStats sample_stats() {
  RunStats s;
  s.frequency_hz = 1.2e9;
  s.cycles = 123456;
  s.per_pe.resize(4);
  for (size_t i = 0; i < 4; i++) {
    s.per_pe[i].issued = 100 * (i + 1);
    s.per_pe[i].issue_cycles = 90 * (i + 1);
    s.per_pe[i].full_stall_cycles = 123456 - 90 * (i + 1);
    s.per_pe[i].by_class[0] = 40;
    s.per_pe[i].by_class[1] = 60 * (i + 1) - 40 + 100 * i;  // arbitrary
    s.per_pe[i].flops[0] = 17 * (i + 1);
    s.per_pe[i].flops[2] = 4;
    s.per_pe[i].l1d_hits = 5;
    s.per_pe[i].l1i_misses = 2;
    s.per_pe[i].sfu_ops = 1;
  }
  s.l1d = {20, 4, 3, 0};
  s.l2d = {2, 2, 1, 192};
  s.llc = {1, 1, 0, 64};
  s.hbm2 = {4096, 640, 74};
  s.barrier_releases = 2;
  s.finalize();
  return s;
}

}  // namespace

TEST_CASE("json report round trips to identical stats") {
  const RunStats s = sample_stats();
  const std::string text = report_json(s);
  const RunStats back = stats_from_json(text);
  CHECK(back == s);
  CHECK(report_json(back) == text);
  CHECK(text.find("\"schema_version\": 1") != std::string::npos);
}

TEST_CASE("csv has a header, one row per PE and a totals row") {
  const RunStats s = sample_stats();
  const std::string csv = report_csv(s);
  size_t rows = 0;
  for (char c : csv)
    if (c == '\n') rows++;
  CHECK(rows == 1 + 4 + 1);
  CHECK(csv.rfind("total,", 0) == std::string::npos);  // totals row is last, not first
  CHECK(csv.find("\ntotal,") != std::string::npos);
  CHECK(csv.rfind("pe,issued,", 0) == 0);
}

TEST_CASE("human report includes peak, achieved and efficiency lines") {
  const RunStats s = sample_stats();
  const std::string h = report_human(s, sc3_default());
  CHECK(h.find("peak") != std::string::npos);
  CHECK(h.find("19.7 TFlops dp") != std::string::npos);
  CHECK(h.find("achieved") != std::string::npos);
  CHECK(h.find("efficiency") != std::string::npos);
}

TEST_CASE("emit_report dispatches formats") {
  const RunStats s = sample_stats();
  std::ostringstream a, b, c;
  emit_report(s, sc3_default(), ReportFormat::Json, a);
  emit_report(s, sc3_default(), ReportFormat::Csv, b);
  emit_report(s, sc3_default(), ReportFormat::Human, c);
  CHECK(a.str().front() == '{');
  CHECK(b.str().rfind("pe,", 0) == 0);
  CHECK(c.str().find("run report") == 0);
}
