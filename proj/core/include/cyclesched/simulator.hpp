#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cyclesched/config.hpp"
#include "cyclesched/metrics.hpp"
#include "cyclesched/placement.hpp"
#include "cyclesched/trace.hpp"

namespace cyclesched {

struct SimReport {
  Policy policy = Policy::SpreadBackfill;
  std::vector<JobMetrics> jobs;
  double makespan = 0.0;
  std::vector<double> group_utilization;
  std::vector<CdfPoint> cdf;
  std::vector<SimEvent> events;
  std::int64_t context_switches = 0;
  std::int64_t backfilled_requests = 0;
  std::int64_t preemptions = 0;
  PruneStats prune;
};

using AcceptFn = std::function<bool(const std::vector<int>& groups, Slot delta)>;

/// Admission and placement of one job under `policy`. Returns nullopt when
/// the job has to queue; `state` is unchanged in that case.
std::optional<PlacementDecision> apply_policy(Policy policy, const PlacementRequest& job,
                                              ClusterState& state, const SimConfig& cfg,
                                              const AcceptFn& accept = {},
                                              Slot lifetime_slots = 0,
                                              PruneStats* stats = nullptr);

/// Replays the trace under cfg.policy. Deterministic for a fixed
/// (trace, cfg). Throws ConfigInfeasible if a job needs more node groups
/// than the cluster has.
SimReport run_simulation(const WorkloadTrace& trace, const SimConfig& cfg);

}  // namespace cyclesched
