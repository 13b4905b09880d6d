#include "cyclesched/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "cyclesched/error.hpp"

namespace cyclesched {

namespace {

constexpr double kEps = 1e-9;

using nlohmann::json;

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::MalformedTrace, "line " + std::to_string(line) + ": " + what);
}

const json& require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) malformed(line, std::string("missing field '") + key + "'");
  return *it;
}

double as_number(const json& v, const char* key, std::size_t line) {
  if (!v.is_number()) malformed(line, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::int64_t as_integer(const json& v, const char* key, std::size_t line) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    malformed(line, std::string("field '") + key + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

TraceJob job_from_json(const json& rec, std::size_t line) {
  if (!rec.is_object()) malformed(line, "record is not an object");
  TraceJob job;
  const json& id = require(rec, "job_id", line);
  if (!id.is_string()) malformed(line, "field 'job_id' must be a string");
  job.profile.job_id = id.get<std::string>();
  job.arrival = as_number(require(rec, "arrival_s", line), "arrival_s", line);
  job.profile.period = as_number(require(rec, "period_s", line), "period_s", line);

  const json& segs = require(rec, "segments", line);
  if (!segs.is_array()) malformed(line, "field 'segments' must be an array");
  for (const json& s : segs) {
    if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number()) {
      malformed(line, "each segment must be [offset, duration]");
    }
    job.profile.segments.push_back({s[0].get<double>(), s[1].get<double>()});
  }
  job.profile.node_demand =
      static_cast<int>(as_integer(require(rec, "node_demand", line), "node_demand", line));
  std::int64_t bytes = as_integer(require(rec, "state_bytes", line), "state_bytes", line);
  if (bytes < 0) malformed(line, "field 'state_bytes' must be non-negative");
  job.profile.state_bytes = static_cast<std::uint64_t>(bytes);

  const json& phases = require(rec, "phases", line);
  if (!phases.is_object()) malformed(line, "field 'phases' must be an object");
  for (const auto& [name, v] : phases.items()) {
    job.profile.phase_costs[name] = as_number(v, "phases", line);
  }
  job.cycles = static_cast<int>(as_integer(require(rec, "cycles", line), "cycles", line));
  return job;
}

}  // namespace

void JobProfile::validate() const {
  auto fail = [this](const std::string& what) {
    throw Error(ErrorCode::InvariantViolation, "job '" + job_id + "': " + what);
  };
  if (!(period > 0.0)) fail("period must be positive");
  if (node_demand < 1) fail("node_demand must be >= 1");
  if (segments.empty()) fail("at least one segment is required");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    if (s.offset < 0.0) fail("segment " + std::to_string(i) + " has negative offset");
    if (!(s.duration > 0.0)) fail("segment " + std::to_string(i) + " has non-positive duration");
    if (s.offset + s.duration > period + kEps) {
      fail("segment " + std::to_string(i) + " ends past the period (a + d > T)");
    }
    if (i > 0) {
      const Segment& prev = segments[i - 1];
      if (s.offset < prev.offset) fail("segments are not sorted by offset");
      if (prev.offset + prev.duration > s.offset + kEps) {
        fail("segments " + std::to_string(i - 1) + " and " + std::to_string(i) + " overlap");
      }
    }
  }
  for (const auto& [name, secs] : phase_costs) {
    if (secs < 0.0) fail("phase '" + name + "' has negative cost");
  }
}

double JobProfile::active_end() const {
  double end = 0.0;
  for (const auto& s : segments) end = std::max(end, s.offset + s.duration);
  return end;
}

double JobProfile::active_time() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.duration;
  return total;
}

Slot ceil_slots(double seconds, double slot_len) {
  return static_cast<Slot>(std::ceil(seconds / slot_len - kEps));
}

Slot floor_slots(double seconds, double slot_len) {
  return static_cast<Slot>(std::floor(seconds / slot_len + kEps));
}

Slot SlotProfile::active_end() const {
  Slot end = 0;
  for (const auto& s : segments) end = std::max(end, s.end());
  return end;
}

Slot SlotProfile::active_time() const {
  Slot total = 0;
  for (const auto& s : segments) total += s.duration;
  return total;
}

SlotProfile to_slots(const JobProfile& profile, double slot_len) {
  SlotProfile out;
  out.period = std::max<Slot>(1, ceil_slots(profile.period, slot_len));
  for (const auto& s : profile.segments) {
    Slot begin = floor_slots(s.offset, slot_len);
    Slot end = std::min(out.period, std::max(begin + 1, ceil_slots(s.offset + s.duration, slot_len)));
    if (!out.segments.empty() && out.segments.back().end() >= begin) {
      SlotSegment& last = out.segments.back();
      last.duration = std::max(last.end(), end) - last.offset;
    } else {
      out.segments.push_back({begin, end - begin});
    }
  }
  return out;
}

void WorkloadTrace::validate() const {
  std::set<JobId> seen;
  for (const auto& job : jobs) {
    job.profile.validate();
    if (job.arrival < 0.0) {
      throw Error(ErrorCode::InvariantViolation,
                  "job '" + job.profile.job_id + "': arrival must be >= 0");
    }
    if (job.cycles < 1) {
      throw Error(ErrorCode::InvariantViolation,
                  "job '" + job.profile.job_id + "': cycles must be >= 1");
    }
    if (!seen.insert(job.profile.job_id).second) {
      throw Error(ErrorCode::InvariantViolation, "duplicate job_id '" + job.profile.job_id + "'");
    }
  }
}

WorkloadTrace parse_trace(std::istream& in) {
  WorkloadTrace trace;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      malformed(line, std::string("invalid JSON: ") + e.what());
    }
    trace.jobs.push_back(job_from_json(rec, line));
  }
  trace.validate();
  return trace;
}

WorkloadTrace parse_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open trace '" + path.string() + "'");
  return parse_trace(in);
}

void serialize_trace(const WorkloadTrace& trace, std::ostream& out) {
  for (const auto& job : trace.jobs) {
    nlohmann::ordered_json segs = nlohmann::ordered_json::array();
    for (const auto& s : job.profile.segments) segs.push_back({s.offset, s.duration});
    nlohmann::ordered_json phases = nlohmann::ordered_json::object();
    for (const auto& [name, secs] : job.profile.phase_costs) phases[name] = secs;

    nlohmann::ordered_json rec;
    rec["job_id"] = job.profile.job_id;
    rec["arrival_s"] = job.arrival;
    rec["period_s"] = job.profile.period;
    rec["segments"] = std::move(segs);
    rec["node_demand"] = job.profile.node_demand;
    rec["state_bytes"] = job.profile.state_bytes;
    rec["phases"] = std::move(phases);
    rec["cycles"] = job.cycles;
    out << rec.dump() << '\n';
  }
}

void write_trace(const WorkloadTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write trace '" + path.string() + "'");
  serialize_trace(trace, out);
  if (!out) throw Error(ErrorCode::IoFailure, "short write to '" + path.string() + "'");
}

std::vector<ExecutionEvent> parse_events(std::istream& in) {
  std::vector<ExecutionEvent> events;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      malformed(line, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) malformed(line, "record is not an object");
    ExecutionEvent ev;
    const json& id = require(rec, "job_id", line);
    const json& phase = require(rec, "phase", line);
    if (!id.is_string() || !phase.is_string()) malformed(line, "job_id and phase must be strings");
    ev.job_id = id.get<std::string>();
    ev.phase = phase.get<std::string>();
    ev.start = as_number(require(rec, "start", line), "start", line);
    ev.end = as_number(require(rec, "end", line), "end", line);
    if (!(ev.end > ev.start)) {
      throw Error(ErrorCode::InvariantViolation,
                  "line " + std::to_string(line) + ": event end must be after start");
    }
    events.push_back(std::move(ev));
  }
  return events;
}

std::vector<ExecutionEvent> parse_events(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open events '" + path.string() + "'");
  return parse_events(in);
}

}  // namespace cyclesched
