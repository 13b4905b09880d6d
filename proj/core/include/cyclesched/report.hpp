#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "cyclesched/simulator.hpp"

namespace cyclesched {

/// Rounds to four decimals so that serialized numbers are stable.
double round4(double v);

nlohmann::ordered_json summary_json(const SimReport& report);
void write_events_jsonl(const std::vector<SimEvent>& events, std::ostream& out);
/// "normalized_delay,cumulative_fraction" rows.
void write_cdf_csv(const std::vector<CdfPoint>& cdf, std::ostream& out);
/// Per-group Gantt rows: group,job,request,kind,start,end with kind one of
/// exec, load, offload.
void write_timeline_csv(const std::vector<SimEvent>& events, std::ostream& out);

/// Writes summary.json, cdf.csv, timeline.csv and events.jsonl into `outdir`
/// (created if missing). Throws IoFailure.
std::vector<std::filesystem::path> emit_report(const SimReport& report,
                                               const std::filesystem::path& outdir);

}  // namespace cyclesched
