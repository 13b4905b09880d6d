#pragma once

#include <functional>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "cyclesched/timeline.hpp"
#include "cyclesched/trace.hpp"

namespace cyclesched {

struct PlacementConfig {
  double w1 = 1.0;
  double w2 = 1.0;
  /// Shift bound: delta ranges over [0, alpha * T].
  double alpha = 0.5;
  /// Count overlap with critical (training-phase) resident segments twice.
  bool interference_weighting = false;
  /// Exposed for configuration; placements are still required to fit free
  /// windows exactly, so only 0 is meaningful today.
  double max_overlap_fraction = 0.0;

  void validate() const;
};

enum class StartMode { Cold, Warm };

struct PlacementDecision {
  JobId job_id;
  std::vector<int> node_group_ids;
  Slot delta = 0;
  double cost = 0.0;
  StartMode mode = StartMode::Warm;
  double interference = 0.0;
};

/// w1 * (t_end(delta) - T) / T + w2 * delta / T with
/// t_end(delta) = delta + max_i(a_i + d_i).
double scheduling_cost(Slot delta, std::span<const SlotSegment> segments, Slot period,
                       const PlacementConfig& cfg);

struct ShiftResult {
  Slot delta = 0;
  double cost = 0.0;
};

struct ShiftSearchOptions {
  /// Periods of the pattern that must fit (occurrence p is shifted by p*T).
  std::int64_t periods = 1;
  /// Relative slots past this point are clipped away before fitting.
  Slot horizon = std::numeric_limits<Slot>::max();
  /// Optional per-delta pre-filter (index = delta); false means pruned.
  const std::vector<bool>* admissible = nullptr;
};

/// Smallest-cost delta in [0, floor(alpha*T)] for which every shifted
/// segment lies inside one window; ties go to the smaller delta. Throws
/// NoFeasibleShift.
ShiftResult micro_shift_search(std::span<const SlotSegment> segments, Slot period,
                               const IntervalSet& windows, const PlacementConfig& cfg,
                               const ShiftSearchOptions& opts = {});

/// range_min_capacity(t0, t0 + d) >= k; k <= 0 is vacuously feasible.
bool gang_feasible(const CapacityProfile& profile, int k, double t0, double d);

/// A resident job's pattern as seen from the candidate job's anchor: the
/// resident's cycle begins `phase` slots after the job's anchor.
struct ResidentPattern {
  SlotProfile profile;
  Slot phase = 0;
  /// Per-segment flag marking training-phase (critical) work.
  std::vector<bool> critical;
};

/// Overlapping slots, over one period of the job, between the job shifted by
/// `delta` and each resident's active segments. Additive over residents.
double interference_score(const SlotProfile& job, Slot delta,
                          std::span<const ResidentPattern> residents, bool weighting);

struct InterferenceCandidate {
  int group = 0;
  Slot delta = 0;
  double cost = 0.0;
  std::vector<ResidentPattern> residents;
};

struct RankedCandidate {
  int group = 0;
  Slot delta = 0;
  double cost = 0.0;
  double interference = 0.0;
};

/// Ascending (interference, cost, group).
std::vector<RankedCandidate> rank_by_interference(std::span<const InterferenceCandidate> candidates,
                                                  const SlotProfile& job,
                                                  const PlacementConfig& cfg);

/// Where a job currently sits and the pattern it was reserved with.
struct PlacedJob {
  std::vector<int> node_group_ids;
  SlotProfile profile;
  /// Absolute time (seconds) of the reservation anchor, before delta.
  double anchor_time = 0.0;
  Slot delta = 0;
  StartMode mode = StartMode::Warm;
  /// Cold-start placements own their groups exclusively.
  bool dedicated = false;
};

struct ClusterState {
  ClusterTimeline timeline;
  std::map<JobId, PlacedJob> placed;

  ClusterState(int total_nodes, double horizon_s = 28800.0, double slot_len = 1.0)
      : timeline(total_nodes, horizon_s, slot_len) {}

  /// Jobs whose groups include `group`.
  std::vector<JobId> residents_of(int group) const;
  /// Group sets that host shareable (non-dedicated) jobs, deduplicated.
  std::vector<std::vector<int>> shared_domains() const;
};

struct PlacementRequest {
  JobId job_id;
  SlotProfile profile;
  int node_demand = 1;
  /// Remaining periods to reserve (capped by the horizon).
  std::int64_t periods = 1;
  /// Absolute time the job's next cycle would begin with delta = 0.
  double anchor_time = 0.0;
};

enum class CandidateOrder {
  /// Rank every feasible candidate by interference, then cost; fresh groups
  /// win ties.
  Interference,
  /// Take the first feasible shared domain (in group order), then fresh groups.
  FirstFitPacked,
};

struct PlaceOptions {
  CandidateOrder order = CandidateOrder::Interference;
  /// Candidate group sets to skip entirely (e.g. the admission SLO).
  std::function<bool(const std::vector<int>& groups, Slot delta)> accept;
  /// Cold start: slots reserved end-to-end (0 = whole horizon).
  Slot profiling_slots = 0;
};

/// Counters for how much of the (candidate, delta) space the global
/// capacity prune removed.
struct PruneStats {
  std::int64_t deltas_considered = 0;
  std::int64_t deltas_pruned = 0;
};

/// Cold: K empty groups reserved end-to-end. Warm: prune deltas on the
/// global capacity profile, micro-shift each candidate domain, rank, and
/// commit the winner. Throws NoCapacity without mutating `state`.
PlacementDecision place_job(ClusterState& state, const PlacementRequest& job,
                            const PlacementConfig& cfg, StartMode mode,
                            const PlaceOptions& opts = {}, PruneStats* stats = nullptr);

/// Releases the job's dedicated cold-start reservation and places it warm.
/// On NoCapacity the original reservation is restored before rethrowing.
PlacementDecision repack(ClusterState& state, const PlacementRequest& job,
                         const PlacementConfig& cfg, const PlaceOptions& opts = {});

/// Removes a job and its reservation.
void remove_job(ClusterState& state, const JobId& job_id);

/// Rotates a ring interval set so that `anchor` becomes slot 0.
IntervalSet relative_windows(const IntervalSet& ring_windows, Slot anchor, Slot ring_size);

}  // namespace cyclesched
