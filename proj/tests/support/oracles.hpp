#pragma once

// Reference implementations used to check the production code. They favour
// obviousness over speed: slot-by-slot scans, full re-sorts, no pruning.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cyclesched/metrics.hpp"
#include "cyclesched/placement.hpp"
#include "cyclesched/runtime.hpp"
#include "cyclesched/timeline.hpp"

namespace cyclesched::oracle {

/// free[s] is true when slot s lies inside some window.
std::vector<bool> free_mask(const IntervalSet& windows, Slot length);

/// Linear scan of the mask: every slot of [start, start + duration) free.
bool linear_fit(const std::vector<bool>& free, Slot start, Slot duration);

/// Minimum of free counts over `length` ring slots from `start` (wrapping).
int linear_ring_min(const std::vector<int>& counts, Slot start, Slot length);

/// Tries every delta in [0, floor(alpha*T)] and keeps the cheapest (smallest
/// delta on ties). Occurrences are clipped at `horizon` the same way the
/// production search clips them.
std::optional<ShiftResult> brute_micro_shift(const std::vector<SlotSegment>& segments, Slot period,
                                             const std::vector<bool>& free, const PlacementConfig& cfg,
                                             std::int64_t periods, Slot horizon,
                                             const std::vector<bool>* admissible = nullptr);

/// Slot-granular mirror of ClusterTimeline: one occupancy bit per group and
/// slot, and free counts derived from it.
class SlotLedger {
 public:
  SlotLedger(int groups, Slot slots);
  bool can_commit(const Reservation& r) const;
  void commit(const Reservation& r);
  void release(const Reservation& r);
  std::vector<int> free_counts() const;
  std::vector<bool> group_free(int group) const;

 private:
  Slot slots_;
  std::vector<std::vector<bool>> busy_;
};

/// The strict replanning loop transcribed line by line, with the documented tie-break
/// (resident job, then earliest arrival, then request id).
ResourceView reference_replan(const SchedRequest& r_new, const ResourceView& view, const SetupCost& setup);

/// Interval of device activity on one group taken from an event log.
struct GroupInterval {
  int group;
  std::string job;
  std::string request;
  std::string kind;
  double start;
  double end;
};

std::vector<GroupInterval> group_intervals(const std::vector<SimEvent>& events);

/// Empty string when the property holds, otherwise a description.
std::string check_group_exclusive(const std::vector<SimEvent>& events, int group_count);
std::string check_job_serial(const std::vector<SimEvent>& events);

/// Every cycle's first execution starts no earlier than the training end of
/// the cycle `staleness + 1` steps back plus one period.
std::string check_staleness(const std::vector<SimEvent>& events, const WorkloadTrace& trace,
                            int staleness);

}  // namespace cyclesched::oracle
