#pragma once

#include <condition_variable>
#include <deque>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cyclesched/trace.hpp"

namespace cyclesched {

struct SchedRequest {
  std::string request_id;
  JobId job_id;
  double arrival_time = 0.0;
  double exec_estimate_E = 0.0;
  /// Work left; equals exec_estimate_E until the request has run.
  double remaining_time = 0.0;
  std::string kind;
  int target_wpg = 0;

  bool operator==(const SchedRequest&) const = default;
  void validate() const;
};

struct SetupCost {
  double t_offload = 19.0;
  double t_load = 19.0;

  double c_setup() const { return t_offload + t_load; }
  void validate() const;
  bool operator==(const SetupCost&) const = default;
};

struct ScheduledEntry {
  SchedRequest request;
  double t_start = 0.0;
  double t_end = 0.0;

  bool operator==(const ScheduledEntry&) const = default;
};

/// One node group's view: the loaded job, what is running and the planned
/// timeline. After a replan, `scheduled` lists the whole timeline, including
/// the running request when it keeps the device.
struct ResourceView {
  double t_now = 0.0;
  std::optional<SchedRequest> running;
  std::vector<ScheduledEntry> scheduled;
  std::optional<JobId> resident_job;

  bool operator==(const ResourceView&) const = default;
  /// Throws InvariantViolation unless entries are ordered, disjoint and
  /// start no earlier than t_now.
  void validate() const;
};

enum class ReplanMode {
  /// Every non-running request is sized with the
  /// full setup and only the first slot is preceded by a setup gap.
  Strict,
  /// Strict ordering with physically required gaps: none for the resident
  /// job, t_load on an empty group, t_offload + t_load on a switch.
  Physical,
};

/// Setup actually needed before `job` can run on a group holding `resident`.
double switch_cost(const JobId& job, const std::optional<JobId>& resident, const SetupCost& setup);

/// E + switch_cost(job, resident).
double effective_service_time(const SchedRequest& req, const std::optional<JobId>& resident,
                              const SetupCost& setup);

/// 1 + (t_now - arrival) / effective_service_time.
double hrrs_priority(const SchedRequest& req, double t_now, const std::optional<JobId>& resident,
                     const SetupCost& setup);

ResourceView replan_with_hrrs(const SchedRequest& incoming, const ResourceView& view,
                              const SetupCost& setup, ReplanMode mode = ReplanMode::Physical);

/// Re-plans without a new arrival (the group became free or a timer fired).
ResourceView replan_with_hrrs(const ResourceView& view, const SetupCost& setup,
                              ReplanMode mode = ReplanMode::Physical);

enum class ContextOpKind { Offload, Load };

struct ContextOp {
  ContextOpKind kind;
  JobId job_id;
  int group = 0;

  bool operator==(const ContextOp&) const = default;
};

/// Operations to prepend before `incoming` runs on `group`; the map is moved
/// to `incoming`.
std::vector<ContextOp> transition_context(int group, const JobId& incoming,
                                          std::map<int, JobId>& resident_map);

enum class JobPhase { Queued, Running, Completed };
enum class JobEvent { Admit, LockAcquired, PrereqDone, Finished };

struct JobState {
  JobPhase state = JobPhase::Queued;
  bool holds_lock = false;
  bool prerequisites_done = false;

  bool operator==(const JobState&) const = default;
};

/// Throws IllegalTransition for any move outside QUEUED -> RUNNING -> COMPLETED.
JobState fsm_advance(const JobState& job, JobEvent event);

const char* to_string(JobPhase phase);

struct Operation {
  std::uint64_t op_id = 0;
  JobId job_id;
  std::string kind;
};

using CompletionHandle = std::shared_future<void>;

/// Per-job FIFO operation queues. Submission is linearizable and never
/// waits for scheduling; handles resolve once a consumer completes the op.
class OperationQueues {
 public:
  void register_job(const JobId& job_id);
  /// Later submissions fail with JobCompleted; queued work stays drainable.
  void mark_completed(const JobId& job_id);

  CompletionHandle submit(Operation op);

  /// Oldest op of the lowest job id with work, if any.
  std::optional<Operation> try_pop();
  /// Blocks until an op is available or close() was called.
  std::optional<Operation> wait_pop();
  void complete(std::uint64_t op_id);
  void close();

  std::size_t queue_length(const JobId& job_id) const;

 private:
  struct Pending {
    Operation op;
    std::promise<void> done;
  };
  std::optional<Operation> pop_locked();

  mutable std::mutex mu_;
  std::condition_variable cv_;
  bool closed_ = false;
  std::uint64_t next_id_ = 1;
  std::map<JobId, bool> jobs_;  // job -> completed
  std::map<JobId, std::deque<std::uint64_t>> queues_;
  std::map<std::uint64_t, Pending> pending_;
};

CompletionHandle submit_operation(Operation op, OperationQueues& queues);

}  // namespace cyclesched
