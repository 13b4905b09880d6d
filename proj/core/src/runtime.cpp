#include "cyclesched/runtime.hpp"

#include <algorithm>
#include <set>

#include "cyclesched/error.hpp"

namespace cyclesched {

void SchedRequest::validate() const {
  if (!(exec_estimate_E > 0.0)) {
    throw Error(ErrorCode::InvariantViolation, "request '" + request_id + "' needs exec_estimate_E > 0");
  }
  if (remaining_time < 0.0 || remaining_time > exec_estimate_E) {
    throw Error(ErrorCode::InvariantViolation,
                "request '" + request_id + "' remaining_time outside [0, E]");
  }
}

void SetupCost::validate() const {
  if (t_offload < 0.0 || t_load < 0.0) throw Error(ErrorCode::InvalidConfig, "setup costs must be >= 0");
}

void ResourceView::validate() const {
  double cursor = t_now;
  for (const auto& e : scheduled) {
    if (e.t_start < cursor || e.t_end < e.t_start) {
      throw Error(ErrorCode::InvariantViolation,
                  "scheduled entry '" + e.request.request_id + "' overlaps or precedes t_now");
    }
    cursor = e.t_end;
  }
}

double switch_cost(const JobId& job, const std::optional<JobId>& resident, const SetupCost& setup) {
  if (!resident) return setup.t_load;
  return *resident == job ? 0.0 : setup.c_setup();
}

double effective_service_time(const SchedRequest& req, const std::optional<JobId>& resident,
                              const SetupCost& setup) {
  return req.exec_estimate_E + switch_cost(req.job_id, resident, setup);
}

double hrrs_priority(const SchedRequest& req, double t_now, const std::optional<JobId>& resident,
                     const SetupCost& setup) {
  return 1.0 + (t_now - req.arrival_time) / effective_service_time(req, resident, setup);
}

namespace {

struct Scored {
  SchedRequest req;
  bool is_running = false;
  double t_req = 0.0;
  double score = 0.0;
};

ResourceView replan(const std::optional<SchedRequest>& incoming, const ResourceView& view,
                    const SetupCost& setup, ReplanMode mode) {
  std::vector<Scored> omega;
  std::set<std::string> seen;
  auto add = [&](const SchedRequest& r, bool running) {
    if (!seen.insert(r.request_id).second) return;
    omega.push_back({r, running, 0.0, 0.0});
  };
  if (incoming) add(*incoming, false);
  if (view.running) add(*view.running, true);
  for (const auto& e : view.scheduled) add(e.request, false);

  for (auto& s : omega) {
    const double t_wait = view.t_now - s.req.arrival_time;
    s.t_req = s.is_running ? s.req.remaining_time
                           : s.req.exec_estimate_E + setup.t_load + setup.t_offload;
    s.score = (t_wait + s.t_req) / s.t_req;
  }
  const auto& resident = view.resident_job;
  std::stable_sort(omega.begin(), omega.end(), [&resident](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    const bool ra = resident && a.req.job_id == *resident;
    const bool rb = resident && b.req.job_id == *resident;
    if (ra != rb) return ra;
    if (a.req.arrival_time != b.req.arrival_time) return a.req.arrival_time < b.req.arrival_time;
    return a.req.request_id < b.req.request_id;
  });

  ResourceView out;
  out.t_now = view.t_now;
  out.resident_job = view.resident_job;
  double cursor = view.t_now;

  if (mode == ReplanMode::Strict) {
    for (const auto& s : omega) {
      if (!s.is_running && cursor == view.t_now) cursor = cursor + setup.t_offload + setup.t_load;
      out.scheduled.push_back({s.req, cursor, cursor + s.t_req});
      cursor += s.t_req;
    }
    if (!omega.empty() && omega.front().is_running) out.running = omega.front().req;
    return out;
  }

  std::optional<JobId> loaded = view.resident_job;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    const auto& s = omega[i];
    const bool keeps_device = i == 0 && s.is_running;
    if (!keeps_device) cursor += switch_cost(s.req.job_id, loaded, setup);
    const double duration = s.req.remaining_time;
    out.scheduled.push_back({s.req, cursor, cursor + duration});
    cursor += duration;
    loaded = s.req.job_id;
  }
  if (!omega.empty() && omega.front().is_running) out.running = omega.front().req;
  return out;
}

}  // namespace

ResourceView replan_with_hrrs(const SchedRequest& incoming, const ResourceView& view,
                              const SetupCost& setup, ReplanMode mode) {
  return replan(incoming, view, setup, mode);
}

ResourceView replan_with_hrrs(const ResourceView& view, const SetupCost& setup, ReplanMode mode) {
  return replan(std::nullopt, view, setup, mode);
}

std::vector<ContextOp> transition_context(int group, const JobId& incoming,
                                          std::map<int, JobId>& resident_map) {
  std::vector<ContextOp> ops;
  auto it = resident_map.find(group);
  if (it != resident_map.end()) {
    if (it->second == incoming) return ops;
    ops.push_back({ContextOpKind::Offload, it->second, group});
  }
  ops.push_back({ContextOpKind::Load, incoming, group});
  resident_map[group] = incoming;
  return ops;
}

const char* to_string(JobPhase phase) {
  switch (phase) {
    case JobPhase::Queued: return "QUEUED";
    case JobPhase::Running: return "RUNNING";
    case JobPhase::Completed: return "COMPLETED";
  }
  return "?";
}

JobState fsm_advance(const JobState& job, JobEvent event) {
  auto illegal = [&job](const char* what) -> JobState {
    throw Error(ErrorCode::IllegalTransition, std::string(to_string(job.state)) + " + " + what);
  };
  JobState next = job;
  switch (job.state) {
    case JobPhase::Queued:
      switch (event) {
        case JobEvent::Admit:
          if (job.holds_lock || job.prerequisites_done) return illegal("admit");
          return next;
        case JobEvent::LockAcquired:
          if (job.holds_lock) return illegal("lock_acquired");
          next.holds_lock = true;
          break;
        case JobEvent::PrereqDone:
          if (job.prerequisites_done) return illegal("prereq_done");
          next.prerequisites_done = true;
          break;
        case JobEvent::Finished:
          return illegal("finished");
      }
      if (next.holds_lock && next.prerequisites_done) next.state = JobPhase::Running;
      return next;
    case JobPhase::Running:
      if (event != JobEvent::Finished) return illegal("event other than finished");
      next.state = JobPhase::Completed;
      next.holds_lock = false;
      return next;
    case JobPhase::Completed:
      return illegal("any event");
  }
  return illegal("unknown state");
}

void OperationQueues::register_job(const JobId& job_id) {
  std::lock_guard lock(mu_);
  jobs_.try_emplace(job_id, false);
}

void OperationQueues::mark_completed(const JobId& job_id) {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw Error(ErrorCode::UnknownJob, "job '" + job_id + "' is not registered");
  it->second = true;
}

CompletionHandle OperationQueues::submit(Operation op) {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(op.job_id);
  if (it == jobs_.end()) throw Error(ErrorCode::UnknownJob, "job '" + op.job_id + "' is not registered");
  if (it->second) throw Error(ErrorCode::JobCompleted, "job '" + op.job_id + "' has completed");
  op.op_id = next_id_++;
  const auto id = op.op_id;
  auto& slot = pending_[id];
  slot.op = std::move(op);
  CompletionHandle handle = slot.done.get_future().share();
  queues_[slot.op.job_id].push_back(id);
  cv_.notify_one();
  return handle;
}

std::optional<Operation> OperationQueues::pop_locked() {
  for (auto& [job, q] : queues_) {
    if (q.empty()) continue;
    const auto id = q.front();
    q.pop_front();
    return pending_.at(id).op;
  }
  return std::nullopt;
}

std::optional<Operation> OperationQueues::try_pop() {
  std::lock_guard lock(mu_);
  return pop_locked();
}

std::optional<Operation> OperationQueues::wait_pop() {
  std::unique_lock lock(mu_);
  for (;;) {
    if (auto op = pop_locked()) return op;
    if (closed_) return std::nullopt;
    cv_.wait(lock);
  }
}

void OperationQueues::complete(std::uint64_t op_id) {
  std::lock_guard lock(mu_);
  auto it = pending_.find(op_id);
  if (it == pending_.end()) throw Error(ErrorCode::PreconditionFailed, "operation is not pending");
  it->second.done.set_value();
  pending_.erase(it);
}

void OperationQueues::close() {
  std::lock_guard lock(mu_);
  closed_ = true;
  cv_.notify_all();
}

std::size_t OperationQueues::queue_length(const JobId& job_id) const {
  std::lock_guard lock(mu_);
  auto it = queues_.find(job_id);
  return it == queues_.end() ? 0 : it->second.size();
}

CompletionHandle submit_operation(Operation op, OperationQueues& queues) {
  return queues.submit(std::move(op));
}

}  // namespace cyclesched
