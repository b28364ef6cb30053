#pragma once

#include <ostream>
#include <string>

#include "sc3sim/config.hpp"
#include "sc3sim/stats.hpp"

namespace sc3sim {

enum class ReportFormat { Human, Csv, Json };

// Lossless machine formats (json carries every counter and round-trips
// bit-exactly; csv is one header row, one row per PE, one totals row).
// Human output echoes the published one-decimal rounding for TFlops while
// machine output keeps full precision.
std::string report_json(const RunStats& stats);
RunStats stats_from_json(const std::string& text);
std::string report_csv(const RunStats& stats);
std::string report_human(const RunStats& stats, const ChipConfig& cfg);

void emit_report(const RunStats& stats, const ChipConfig& cfg, ReportFormat fmt,
                 std::ostream& out);

}  // namespace sc3sim
