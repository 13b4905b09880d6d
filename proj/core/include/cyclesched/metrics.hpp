#pragma once

#include <map>
#include <string>
#include <vector>

#include "cyclesched/trace.hpp"

namespace cyclesched {

/// One structured log record. Job-level records (arrive, release, place,
/// complete) use group -1; device records repeat once per gang member.
struct SimEvent {
  double t = 0.0;
  int group = -1;
  JobId job;
  std::string request;
  /// arrive, place, release, load_start, load_finish, offload_start,
  /// offload_finish, start, stop, finish, complete.
  std::string action;

  bool operator==(const SimEvent&) const = default;
};

struct JobMetrics {
  JobId job_id;
  double arrival = 0.0;
  double wait_time = 0.0;
  double job_duration = 0.0;
  double normalized_delay = 0.0;
  double completion_time = 0.0;
  /// wait_time over the job's wall time (arrival to completion).
  double wait_fraction = 0.0;
  bool slo_violation = false;
  double bubble_ratio = 0.0;

  bool operator==(const JobMetrics&) const = default;
};

struct CdfPoint {
  double normalized_delay = 0.0;
  double cumulative_fraction = 0.0;

  bool operator==(const CdfPoint&) const = default;
};

struct MetricsSummary {
  std::vector<JobMetrics> jobs;
  double makespan = 0.0;
  std::vector<double> group_utilization;
  std::vector<CdfPoint> cdf;
};

/// 1 - sum(phases) / cycle_time, unrounded. Throws
/// PhaseExceedsCycle.
double bubble_ratio(double cycle_time, const std::vector<double>& training_side_phases);

/// Bubble ratio from a profile's non-rollout phase costs, or from its active
/// segments when no phase costs are recorded.
double job_bubble_ratio(const JobProfile& profile);

/// One point per distinct value: (value, fraction of samples <= value).
std::vector<CdfPoint> delay_cdf(std::vector<double> normalized_delays);

/// Wait is the time a released request spends neither executing nor
/// finished, load time included. Jobs are ordered by id. Throws
/// IncompleteLog on unmatched records.
MetricsSummary compute_metrics(const std::vector<SimEvent>& events, int group_count,
                               double duty_ratio_bound);

}  // namespace cyclesched
