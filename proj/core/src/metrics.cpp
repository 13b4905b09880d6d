#include "cyclesched/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "cyclesched/error.hpp"

namespace cyclesched {

double bubble_ratio(double cycle_time, const std::vector<double>& training_side_phases) {
  if (!(cycle_time > 0.0)) throw Error(ErrorCode::PhaseExceedsCycle, "cycle time must be > 0");
  double busy = 0.0;
  for (double p : training_side_phases) {
    if (p < 0.0) throw Error(ErrorCode::PhaseExceedsCycle, "phase durations must be >= 0");
    busy += p;
  }
  if (busy > cycle_time) {
    throw Error(ErrorCode::PhaseExceedsCycle, "training-side phases exceed the cycle time");
  }
  return 1.0 - busy / cycle_time;
}

double job_bubble_ratio(const JobProfile& profile) {
  std::vector<double> training;
  for (const auto& [phase, seconds] : profile.phase_costs) {
    if (!is_rollout_phase(phase)) training.push_back(seconds);
  }
  if (training.empty()) training.push_back(profile.active_time());
  return bubble_ratio(profile.period, training);
}

std::vector<CdfPoint> delay_cdf(std::vector<double> normalized_delays) {
  std::sort(normalized_delays.begin(), normalized_delays.end());
  std::vector<CdfPoint> out;
  const double n = static_cast<double>(normalized_delays.size());
  for (std::size_t i = 0; i < normalized_delays.size(); ++i) {
    if (i + 1 < normalized_delays.size() && normalized_delays[i + 1] == normalized_delays[i]) continue;
    out.push_back({normalized_delays[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

namespace {

struct RequestTrack {
  JobId job;
  std::optional<double> pending_since;
  std::optional<double> running_since;
  double last_end = -1.0;
  bool finished = false;
  bool released = false;
};

struct JobTrack {
  std::optional<double> arrival;
  std::optional<double> completion;
  double wait = 0.0;
  double busy = 0.0;
};

[[noreturn]] void incomplete(const SimEvent& e, const std::string& why) {
  throw Error(ErrorCode::IncompleteLog,
              why + " (job '" + e.job + "', request '" + e.request + "', t=" + std::to_string(e.t) + ")");
}

}  // namespace

MetricsSummary compute_metrics(const std::vector<SimEvent>& events, int group_count,
                               double duty_ratio_bound) {
  std::map<JobId, JobTrack> jobs;
  std::map<std::string, RequestTrack> requests;
  std::vector<double> group_busy(static_cast<std::size_t>(std::max(group_count, 0)), 0.0);
  std::map<std::pair<int, std::string>, double> group_running;

  for (const auto& e : events) {
    if (e.action == "arrive") {
      jobs[e.job].arrival = e.t;
    } else if (e.action == "complete") {
      jobs[e.job].completion = e.t;
    } else if (e.action == "release") {
      auto& r = requests[e.request];
      if (r.released) incomplete(e, "request released twice");
      r = RequestTrack{e.job, e.t, std::nullopt, -1.0, false, true};
    } else if (e.action == "start" || e.action == "stop" || e.action == "finish") {
      auto it = requests.find(e.request);
      if (it == requests.end()) incomplete(e, "execution record without a release");
      auto& r = it->second;
      if (r.finished && !(e.action == "finish" && r.last_end == e.t)) {
        incomplete(e, "execution record after finish");
      }
      if (e.group >= 0 && e.group < group_count) {
        const auto key = std::make_pair(e.group, e.request);
        if (e.action == "start") {
          group_running[key] = e.t;
        } else {
          auto g = group_running.find(key);
          if (g == group_running.end()) incomplete(e, "group stop without start");
          group_busy[static_cast<std::size_t>(e.group)] += e.t - g->second;
          group_running.erase(g);
        }
      }
      auto& job = jobs[r.job];
      if (e.action == "start") {
        if (r.running_since) continue;  // gang duplicate
        if (!r.pending_since) incomplete(e, "start while not pending");
        job.wait += e.t - *r.pending_since;
        r.pending_since.reset();
        r.running_since = e.t;
      } else {
        if (!r.running_since) {
          if (r.last_end == e.t) continue;  // gang duplicate
          incomplete(e, e.action + " without start");
        }
        job.busy += e.t - *r.running_since;
        r.running_since.reset();
        r.last_end = e.t;
        if (e.action == "stop") {
          r.pending_since = e.t;
        } else {
          r.finished = true;
        }
      }
    }
  }
  for (const auto& [id, r] : requests) {
    if (!r.finished) {
      throw Error(ErrorCode::IncompleteLog, "request '" + id + "' never finished");
    }
  }

  MetricsSummary out;
  std::vector<double> delays;
  for (const auto& [id, j] : jobs) {
    if (!j.arrival || !j.completion) {
      throw Error(ErrorCode::IncompleteLog, "job '" + id + "' lacks an arrival or completion record");
    }
    JobMetrics m;
    m.job_id = id;
    m.arrival = *j.arrival;
    m.completion_time = *j.completion;
    m.wait_time = j.wait;
    m.job_duration = j.busy;
    m.normalized_delay = j.busy > 0.0 ? j.wait / j.busy : 0.0;
    const double wall = m.completion_time - m.arrival;
    m.wait_fraction = wall > 0.0 ? j.wait / wall : 0.0;
    m.slo_violation = m.wait_fraction > duty_ratio_bound;
    out.makespan = std::max(out.makespan, m.completion_time);
    delays.push_back(m.normalized_delay);
    out.jobs.push_back(m);
  }
  out.cdf = delay_cdf(std::move(delays));
  for (double busy : group_busy) {
    out.group_utilization.push_back(out.makespan > 0.0 ? busy / out.makespan : 0.0);
  }
  return out;
}

}  // namespace cyclesched
