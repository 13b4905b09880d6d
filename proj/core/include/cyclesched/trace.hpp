#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace cyclesched {

using JobId = std::string;

/// Integer count of timeline slots.
using Slot = std::int64_t;

/// One device-active execution segment within a period, in seconds.
struct Segment {
  double offset = 0.0;
  double duration = 0.0;

  bool operator==(const Segment&) const = default;
};

/// A job's periodic demand signature.
///
/// Offsets and durations are kept in seconds exactly as they were read or
/// profiled. Anything that touches the timeline works on the slot-rounded
/// view returned by to_slots().
struct JobProfile {
  JobId job_id;
  double period = 0.0;
  std::vector<Segment> segments;
  int node_demand = 1;
  std::uint64_t state_bytes = 0;
  std::map<std::string, double> phase_costs;

  bool operator==(const JobProfile&) const = default;

  /// Throws Error{InvariantViolation} naming the first broken invariant.
  void validate() const;

  /// Largest segment end, max(a + d).
  double active_end() const;
  double active_time() const;
  double duty_ratio() const { return active_time() / period; }
};

struct SlotSegment {
  Slot offset = 0;
  Slot duration = 0;

  Slot end() const { return offset + duration; }
  bool operator==(const SlotSegment&) const = default;
};

/// Slot-granular projection of a JobProfile. Offsets round down and ends
/// round up so a reservation always covers the profiled activity; segments
/// that touch after rounding are merged.
struct SlotProfile {
  Slot period = 0;
  std::vector<SlotSegment> segments;

  Slot active_end() const;
  Slot active_time() const;
  bool operator==(const SlotProfile&) const = default;
};

SlotProfile to_slots(const JobProfile& profile, double slot_len);

/// Seconds to slots, rounding up (durations) or down (offsets), tolerant to
/// representation error in values that are already whole slots.
Slot ceil_slots(double seconds, double slot_len);
Slot floor_slots(double seconds, double slot_len);

struct TraceJob {
  JobProfile profile;
  double arrival = 0.0;
  int cycles = 1;

  bool operator==(const TraceJob&) const = default;
};

struct WorkloadTrace {
  std::vector<TraceJob> jobs;

  bool operator==(const WorkloadTrace&) const = default;

  void validate() const;
};

/// One observed phase execution, the raw input to cold-start profiling.
struct ExecutionEvent {
  JobId job_id;
  std::string phase;
  double start = 0.0;
  double end = 0.0;
};

// Trace file: UTF-8 JSON lines, one job per line:
//   {"job_id", "arrival_s", "period_s", "segments": [[a, d], ...],
//    "node_demand", "state_bytes", "phases": {name: seconds}, "cycles"}
WorkloadTrace parse_trace(std::istream& in);
WorkloadTrace parse_trace(const std::filesystem::path& path);
void serialize_trace(const WorkloadTrace& trace, std::ostream& out);
void write_trace(const WorkloadTrace& trace, const std::filesystem::path& path);

/// Parameters for the synthetic workload generator. Ranges are inclusive.
struct GeneratorSpec {
  int job_count = 1;
  double period_min = 100.0;
  double period_max = 100.0;
  /// Periods are snapped to multiples of this value when > 0, which keeps
  /// generated jobs commensurate.
  double period_quantum = 0.0;
  double duty_min = 0.5;
  double duty_max = 0.5;
  int node_demand_min = 1;
  int node_demand_max = 1;
  int cycles_min = 1;
  int cycles_max = 1;
  /// Mean gap between consecutive arrivals; 0 puts every arrival at t = 0.
  double mean_interarrival = 0.0;
  std::uint64_t state_bytes_min = 19'000'000'000ULL;
  std::uint64_t state_bytes_max = 19'000'000'000ULL;
  /// Alternate jobs start their active segment half a period late.
  bool anti_phase = false;
  /// Place each job's segment at a random offset instead of 0.
  bool random_offset = false;
};

GeneratorSpec parse_generator_spec(std::istream& in);
GeneratorSpec parse_generator_spec(const std::filesystem::path& path);

WorkloadTrace synthesize_workload(const GeneratorSpec& spec, std::uint64_t seed);

struct ProfilerConfig {
  double slot_len = 1.0;
  /// Largest mismatch fraction accepted when matching a candidate period.
  double jitter_tolerance = 0.05;
  /// Complete cycles that must be observed before a profile is trusted.
  int min_cycles = 1;
};

/// Phases whose names mark them as rollout-side work; everything else counts
/// as training-side (device-active) work.
bool is_rollout_phase(const std::string& phase);

JobProfile profile_job(const std::vector<ExecutionEvent>& events,
                       const ProfilerConfig& cfg = {});

std::vector<ExecutionEvent> parse_events(std::istream& in);
std::vector<ExecutionEvent> parse_events(const std::filesystem::path& path);

}  // namespace cyclesched
