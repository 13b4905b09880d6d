#include "cyclesched/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <tuple>

#include "cyclesched/error.hpp"

namespace cyclesched {

double round4(double v) {
  const double r = std::round(v * 1e4) / 1e4;
  return r == 0.0 ? 0.0 : r;
}

nlohmann::ordered_json summary_json(const SimReport& report) {
  nlohmann::ordered_json j;
  j["policy"] = to_string(report.policy);
  j["makespan"] = round4(report.makespan);
  j["context_switches"] = report.context_switches;
  j["backfilled_requests"] = report.backfilled_requests;
  j["preemptions"] = report.preemptions;
  j["slo_violations"] = std::count_if(report.jobs.begin(), report.jobs.end(),
                                      [](const JobMetrics& m) { return m.slo_violation; });
  auto util = nlohmann::ordered_json::array();
  for (double u : report.group_utilization) util.push_back(round4(u));
  j["group_utilization"] = util;
  auto jobs = nlohmann::ordered_json::array();
  for (const auto& m : report.jobs) {
    nlohmann::ordered_json e;
    e["job_id"] = m.job_id;
    e["arrival"] = round4(m.arrival);
    e["wait_time"] = round4(m.wait_time);
    e["job_duration"] = round4(m.job_duration);
    e["normalized_delay"] = round4(m.normalized_delay);
    e["completion_time"] = round4(m.completion_time);
    e["wait_fraction"] = round4(m.wait_fraction);
    e["slo_violation"] = m.slo_violation;
    e["bubble_ratio"] = round4(m.bubble_ratio);
    jobs.push_back(std::move(e));
  }
  j["jobs"] = jobs;
  return j;
}

void write_events_jsonl(const std::vector<SimEvent>& events, std::ostream& out) {
  for (const auto& e : events) {
    nlohmann::ordered_json j;
    j["t"] = round4(e.t);
    j["group"] = e.group;
    j["job"] = e.job;
    j["request"] = e.request;
    j["action"] = e.action;
    out << j.dump() << '\n';
  }
}

void write_cdf_csv(const std::vector<CdfPoint>& cdf, std::ostream& out) {
  out << "normalized_delay,cumulative_fraction\n" << std::fixed << std::setprecision(4);
  for (const auto& p : cdf) out << p.normalized_delay << ',' << p.cumulative_fraction << '\n';
}

void write_timeline_csv(const std::vector<SimEvent>& events, std::ostream& out) {
  struct Row {
    int group;
    std::string job, request, kind;
    double start, end;
  };
  std::vector<Row> rows;
  std::map<std::tuple<int, std::string, std::string>, std::pair<double, std::string>> open;
  auto kind_of = [](const std::string& action, std::string& kind, bool& begin) {
    if (action == "start") { kind = "exec"; begin = true; return true; }
    if (action == "stop" || action == "finish") { kind = "exec"; begin = false; return true; }
    if (action == "load_start") { kind = "load"; begin = true; return true; }
    if (action == "load_finish") { kind = "load"; begin = false; return true; }
    if (action == "offload_start") { kind = "offload"; begin = true; return true; }
    if (action == "offload_finish") { kind = "offload"; begin = false; return true; }
    return false;
  };
  for (const auto& e : events) {
    if (e.group < 0) continue;
    std::string kind;
    bool begin = false;
    if (!kind_of(e.action, kind, begin)) continue;
    const auto key = std::make_tuple(e.group, e.job, kind);
    if (begin) {
      open[key] = {e.t, e.request};
    } else if (auto it = open.find(key); it != open.end()) {
      rows.push_back({e.group, e.job, it->second.second, kind, it->second.first, e.t});
      open.erase(it);
    }
  }
  out << "group,job,request,kind,start,end\n" << std::fixed << std::setprecision(4);
  for (const auto& r : rows) {
    out << r.group << ',' << r.job << ',' << r.request << ',' << r.kind << ',' << r.start << ',' << r.end
        << '\n';
  }
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + p.string() + "'");
  return out;
}

void check(std::ofstream& out, const std::filesystem::path& p) {
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing '" + p.string() + "'");
}

}  // namespace

std::vector<std::filesystem::path> emit_report(const SimReport& report,
                                               const std::filesystem::path& outdir) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create '" + outdir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  auto emit = [&](const char* name, auto&& body) {
    const auto p = outdir / name;
    written.push_back(p);
    auto out = open_out(p);
    body(out);
    check(out, p);
  };
  emit("summary.json", [&](std::ostream& o) { o << summary_json(report).dump(2) << '\n'; });
  emit("cdf.csv", [&](std::ostream& o) { write_cdf_csv(report.cdf, o); });
  emit("timeline.csv", [&](std::ostream& o) { write_timeline_csv(report.events, o); });
  emit("events.jsonl", [&](std::ostream& o) { write_events_jsonl(report.events, o); });
  return written;
}

}  // namespace cyclesched
