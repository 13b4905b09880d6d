#include "cyclesched/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <set>

#include "cyclesched/error.hpp"
#include "cyclesched/runtime.hpp"
#include "cyclesched/statemodel.hpp"

namespace cyclesched {

std::optional<PlacementDecision> apply_policy(Policy policy, const PlacementRequest& job,
                                              ClusterState& state, const SimConfig& cfg,
                                              const AcceptFn& accept, Slot lifetime_slots,
                                              PruneStats* stats) {
  PlaceOptions opts;
  opts.accept = accept;
  PlacementConfig pc = cfg.placement;
  StartMode mode = StartMode::Warm;
  switch (policy) {
    case Policy::Isolated:
      mode = StartMode::Cold;
      opts.profiling_slots = lifetime_slots;
      break;
    case Policy::Pack:
      opts.order = CandidateOrder::FirstFitPacked;
      pc.w2 = 0.0;
      if (pc.w1 <= 0.0) pc.w1 = 1.0;
      break;
    case Policy::Spread:
    case Policy::SpreadBackfill:
      opts.order = CandidateOrder::Interference;
      break;
  }
  try {
    return place_job(state, job, pc, mode, opts, stats);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoCapacity) throw;
    return std::nullopt;
  }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Ev { Finish, SetupDone, JobDone, Decide, Release, Eligible, Arrival };

int ev_class(Ev e) {
  switch (e) {
    case Ev::Finish:
    case Ev::SetupDone: return 0;
    case Ev::JobDone: return 1;
    case Ev::Decide: return 2;
    case Ev::Release:
    case Ev::Eligible: return 3;
    case Ev::Arrival: return 4;
  }
  return 5;
}

struct QueuedEvent {
  double t;
  int cls;
  std::uint64_t seq;
  Ev type;
  int target;
  std::uint64_t token;

  bool operator>(const QueuedEvent& o) const {
    if (t != o.t) return t > o.t;
    if (cls != o.cls) return cls > o.cls;
    return seq > o.seq;
  }
};

struct JobRt {
  const TraceJob* trace = nullptr;
  SlotProfile slots;
  int cycle = 0;
  std::size_t seg = 0;
  std::vector<double> train_end;
  std::vector<double> ready;
  int domain = -1;
  bool queued = false;
  bool done = false;
  bool profiling = false;
  double hold = 0.0;
  /// Released request not yet handed to a domain (held or unplaced).
  std::optional<SchedRequest> pending;
  /// Next time this job will present work to its domain.
  double next_release = kInf;
  double wait = 0.0;
  double wait_open = -1.0;
  std::vector<ExecutionEvent> exec_log;

  const JobProfile& profile() const { return trace->profile; }
  int demand() const { return trace->profile.node_demand; }
};

enum class Phase { Idle, Setup, Busy };

struct Domain {
  std::vector<int> groups;
  std::set<int> residents;
  int loaded = -1;
  Phase phase = Phase::Idle;
  std::vector<SchedRequest> pending;
  std::optional<SchedRequest> current;
  int current_job = -1;
  double cur_start = 0.0;
  double cur_end = 0.0;
  std::uint64_t token = 0;
  std::optional<SchedRequest> after_setup;
  int after_setup_job = -1;
  int restore_to = -1;
  bool backfill_run = false;
  bool decide_scheduled = false;
  bool alive = true;
};

class Simulator {
 public:
  Simulator(const WorkloadTrace& trace, const SimConfig& cfg)
      : cfg_(cfg),
        state_(cfg.total_node_groups, cfg.horizon, cfg.slot_len),
        group_domain_(static_cast<std::size_t>(cfg.total_node_groups), -1),
        rng_(cfg.seed) {
    setup_ = cfg.setup;
    jobs_.reserve(trace.jobs.size());
    for (const auto& tj : trace.jobs) {
      JobRt j;
      j.trace = &tj;
      j.slots = to_slots(tj.profile, cfg.slot_len);
      jobs_.push_back(std::move(j));
      index_[tj.profile.job_id] = static_cast<int>(jobs_.size()) - 1;
    }
    if (cfg.setup_from_transfer) derive_setup();
  }

  SimReport run() {
    for (std::size_t i = 0; i < jobs_.size(); ++i) {
      push(jobs_[i].trace->arrival, Ev::Arrival, static_cast<int>(i));
    }
    while (!queue_.empty()) {
      const QueuedEvent e = queue_.top();
      queue_.pop();
      handle(e);
    }
    for (const auto& j : jobs_) {
      if (!j.done) {
        throw Error(ErrorCode::InvariantViolation, "job '" + j.profile().job_id + "' never completed");
      }
    }
    std::stable_sort(events_.begin(), events_.end(),
                     [](const SimEvent& a, const SimEvent& b) { return a.t < b.t; });
    SimReport report;
    report.policy = cfg_.policy;
    MetricsSummary m = compute_metrics(events_, cfg_.total_node_groups, cfg_.duty_ratio_bound);
    for (auto& jm : m.jobs) jm.bubble_ratio = job_bubble_ratio(jobs_[index_.at(jm.job_id)].profile());
    report.jobs = std::move(m.jobs);
    report.makespan = m.makespan;
    report.group_utilization = std::move(m.group_utilization);
    report.cdf = std::move(m.cdf);
    report.events = std::move(events_);
    report.context_switches = switches_;
    report.backfilled_requests = backfilled_;
    report.preemptions = preemptions_;
    report.prune = prune_;
    return report;
  }

 private:
  void derive_setup() {
    std::uint64_t bytes = 0;
    for (const auto& j : jobs_) bytes = std::max(bytes, j.profile().state_bytes);
    if (bytes == 0) return;
    ResidencySnapshot snap = dedup_put({}, "state", bytes, 1, Tier::Host);
    const auto up = ensure_resident(snap, {"state"}, Tier::Device, cfg_.transfer);
    const auto down = offload(up.snapshot, {"state"}, Tier::Host, cfg_.transfer);
    setup_.t_load = up.elapsed;
    setup_.t_offload = down.elapsed;
  }

  void push(double t, Ev type, int target, std::uint64_t token = 0) {
    queue_.push({t, ev_class(type), seq_++, type, target, token});
  }

  void log(double t, int group, int job, const std::string& request, const char* action) {
    events_.push_back({t, group, job >= 0 ? jobs_[static_cast<std::size_t>(job)].profile().job_id : "", request, action});
  }

  void log_domain(const Domain& d, double t, int job, const std::string& request, const char* action) {
    for (int g : d.groups) log(t, g, job, request, action);
  }

  JobRt& job(int j) { return jobs_[static_cast<std::size_t>(j)]; }
  Domain& dom(int d) { return domains_[static_cast<std::size_t>(d)]; }

  double ceil_slot(double t) const {
    return std::ceil(t / cfg_.slot_len - 1e-9) * cfg_.slot_len;
  }

  void handle(const QueuedEvent& e) {
    switch (e.type) {
      case Ev::Arrival: on_arrival(e.target, e.t); break;
      case Ev::Release: on_release(e.target, e.t); break;
      case Ev::Eligible: on_eligible(e.target, e.t); break;
      case Ev::Finish: on_finish(e.target, e.token, e.t); break;
      case Ev::SetupDone: on_setup_done(e.target, e.token, e.t); break;
      case Ev::Decide: on_decide(e.target, e.t); break;
      case Ev::JobDone: on_job_done(e.target, e.t); break;
    }
  }

  // Job chain -------------------------------------------------------------

  void on_arrival(int j, double t) {
    JobRt& jr = job(j);
    log(t, -1, j, "", "arrive");
    const double a0 = jr.profile().segments.front().offset;
    jr.ready.push_back(t + a0);
    schedule_release(j, t + a0);
    jr.queued = true;
    admission_.push_back(j);
    try_admit(t);
  }

  void schedule_release(int j, double t) {
    job(j).next_release = t;
    push(t, Ev::Release, j);
  }

  std::string request_id(const JobRt& jr) const {
    return jr.profile().job_id + "/c" + std::to_string(jr.cycle) + "/s" + std::to_string(jr.seg);
  }

  void on_release(int j, double t) {
    JobRt& jr = job(j);
    const Segment& seg = jr.profile().segments[jr.seg];
    double e = seg.duration;
    if (cfg_.exec_jitter > 0.0) {
      e *= std::uniform_real_distribution<double>(1.0 - cfg_.exec_jitter, 1.0 + cfg_.exec_jitter)(rng_);
    }
    e = std::max(e, 1e-6);
    SchedRequest req{request_id(jr), jr.profile().job_id, t, e, e, "train", 0};
    log(t, -1, j, req.request_id, "release");
    jr.wait_open = t;
    jr.pending = req;
    jr.next_release = kInf;
    if (jr.domain >= 0) {
      hand_over(j, t);
    } else if (cfg_.policy == Policy::SpreadBackfill) {
      try_backfill_job(j, t);
    }
  }

  // Passes the job's pending request to its domain, or defers it to the
  // placement hold.
  void hand_over(int j, double t) {
    JobRt& jr = job(j);
    if (!jr.pending || jr.domain < 0) return;
    if (jr.hold > t) {
      jr.next_release = jr.hold;
      push(jr.hold, Ev::Eligible, j);
      return;
    }
    jr.next_release = kInf;
    SchedRequest req = *jr.pending;
    req.target_wpg = dom(jr.domain).groups.front();
    jr.pending.reset();
    submit(jr.domain, std::move(req), t);
  }

  void on_eligible(int j, double t) {
    JobRt& jr = job(j);
    if (jr.hold > t) return;  // superseded by a later placement
    hand_over(j, t);
  }

  void advance_job(int j, double t) {
    JobRt& jr = job(j);
    const auto& segs = jr.profile().segments;
    ++jr.seg;
    if (jr.seg < segs.size()) {
      const double gap = segs[jr.seg].offset - (segs[jr.seg - 1].offset + segs[jr.seg - 1].duration);
      schedule_release(j, t + std::max(0.0, gap));
      return;
    }
    jr.seg = 0;
    jr.train_end.push_back(t);
    ++jr.cycle;
    const double period = jr.profile().period;
    const double tail = period - jr.profile().active_end();
    if (jr.cycle >= jr.trace->cycles) {
      jr.done = true;
      jr.next_release = kInf;
      log(t + tail, -1, j, "", "complete");
      push(t, Ev::JobDone, j);
      return;
    }
    const double a0 = segs.front().offset;
    double release = 0.0;
    if (cfg_.staleness_steps == 0) {
      release = t + tail + a0;
      jr.ready.push_back(release);
    } else {
      const int c = jr.cycle;
      const int dep = c - 1 - cfg_.staleness_steps;
      double start_gen = jr.ready[static_cast<std::size_t>(c - 1)];
      if (dep >= 0) start_gen = std::max(start_gen, jr.train_end[static_cast<std::size_t>(dep)]);
      jr.ready.push_back(start_gen + period);
      release = std::max(t, jr.ready.back());
    }
    schedule_release(j, release);
    if (jr.profiling && jr.cycle >= cfg_.profiling_cycles) try_repack(j, t);
  }

  void on_job_done(int j, double t) {
    JobRt& jr = job(j);
    if (jr.domain >= 0) {
      dom(jr.domain).residents.erase(j);
      remove_job(state_, jr.profile().job_id);
      jr.domain = -1;
    }
    if (jr.queued) {
      admission_.erase(std::find(admission_.begin(), admission_.end(), j));
      jr.queued = false;
    }
    try_admit(t);
  }

  // Admission and placement ----------------------------------------------

  double observed_wait_fraction(int j, double t) {
    const JobRt& jr = job(j);
    const double wall = t - jr.trace->arrival;
    if (wall <= 0.0) return 0.0;
    double w = jr.wait;
    if (jr.wait_open >= 0.0) w += t - jr.wait_open;
    return w / wall;
  }

  bool groups_available(const std::vector<int>& groups) {
    for (int g : groups) {
      const int d = group_domain_[static_cast<std::size_t>(g)];
      if (d < 0) continue;
      const Domain& dm = dom(d);
      if (dm.groups == groups) continue;
      if (dm.phase != Phase::Idle || !dm.pending.empty() || !dm.residents.empty()) return false;
    }
    return true;
  }

  bool slo_admits(const std::vector<int>& groups, double t) {
    const int d = group_domain_[static_cast<std::size_t>(groups.front())];
    if (d < 0 || dom(d).groups != groups) return true;
    for (int r : dom(d).residents) {
      const JobRt& rr = job(r);
      const double projected =
          observed_wait_fraction(r, t) +
          static_cast<double>(rr.profile().segments.size()) * setup_.c_setup() / rr.profile().period;
      if (projected > cfg_.duty_ratio_bound) return false;
    }
    return true;
  }

  double hrrs_admission_score(int j, double t) const {
    const JobRt& jr = jobs_[static_cast<std::size_t>(j)];
    const double work = jr.profile().active_time() * jr.trace->cycles;
    return 1.0 + (t - jr.trace->arrival) / work;
  }

  void try_admit(double t) {
    if (admitting_) return;
    admitting_ = true;
    std::vector<int> order = admission_;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      const double sa = hrrs_admission_score(a, t), sb = hrrs_admission_score(b, t);
      if (sa != sb) return sa > sb;
      return a < b;
    });
    std::vector<int> placed;
    for (int j : order) {
      if (job(j).done || !job(j).queued) continue;
      if (place(j, t)) {
        job(j).queued = false;
        admission_.erase(std::find(admission_.begin(), admission_.end(), j));
        placed.push_back(j);
      }
    }
    admitting_ = false;
    for (int j : placed) hand_over(j, t);
  }

  Slot lifetime_slots(const JobRt& jr) const {
    const double secs = jr.profile().period * (jr.trace->cycles - jr.cycle);
    return std::min(ceil_slots(secs, cfg_.slot_len), state_.timeline.capacity().slots());
  }

  // Anchor: absolute start of the cycle whose next request comes first.
  double anchor_for(const JobRt& jr, double t) const {
    double next = jr.pending ? t : std::max(t, jr.next_release);
    if (std::isinf(next)) next = t;  // a backfilled request is still running
    return std::max(0.0, next - jr.profile().segments[jr.seg].offset);
  }

  PlacementRequest request_for(const JobRt& jr, const SlotProfile& profile, double t) const {
    PlacementRequest req;
    req.job_id = jr.profile().job_id;
    req.profile = profile;
    req.node_demand = jr.demand();
    req.periods = std::max(1, jr.trace->cycles - jr.cycle);
    req.anchor_time = anchor_for(jr, t);
    return req;
  }

  AcceptFn make_accept(double t) {
    return [this, t](const std::vector<int>& groups, Slot) {
      if (!groups_available(groups)) return false;
      if (cfg_.policy == Policy::Isolated) return true;
      return slo_admits(groups, t);
    };
  }

  bool place(int j, double t) {
    JobRt& jr = job(j);
    const PlacementRequest req = request_for(jr, jr.slots, t);
    std::optional<PlacementDecision> decision;
    if (cfg_.cold_start && cfg_.policy != Policy::Isolated) {
      PlaceOptions opts;
      opts.accept = make_accept(t);
      opts.profiling_slots = std::min(ceil_slots(jr.profile().period * cfg_.profiling_cycles, cfg_.slot_len),
                                      state_.timeline.capacity().slots());
      try {
        decision = place_job(state_, req, cfg_.placement, StartMode::Cold, opts, &prune_);
        jr.profiling = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoCapacity) throw;
      }
    } else {
      decision = apply_policy(cfg_.policy, req, state_, cfg_, make_accept(t), lifetime_slots(jr), &prune_);
    }
    if (!decision) return false;
    attach(j, decision->node_group_ids, req.anchor_time, decision->delta, t);
    return true;
  }

  int domain_for(const std::vector<int>& groups) {
    const int existing = group_domain_[static_cast<std::size_t>(groups.front())];
    if (existing >= 0 && dom(existing).groups == groups) return existing;
    for (int g : groups) {
      const int d = group_domain_[static_cast<std::size_t>(g)];
      if (d < 0) continue;
      Domain& stale = dom(d);
      stale.alive = false;
      for (int sg : stale.groups) group_domain_[static_cast<std::size_t>(sg)] = -1;
    }
    Domain fresh;
    fresh.groups = groups;
    domains_.push_back(std::move(fresh));
    const int id = static_cast<int>(domains_.size()) - 1;
    for (int g : groups) group_domain_[static_cast<std::size_t>(g)] = id;
    return id;
  }

  void attach(int j, std::vector<int> groups, double anchor, Slot delta, double t) {
    JobRt& jr = job(j);
    std::sort(groups.begin(), groups.end());
    const int d = domain_for(groups);
    Domain& dm = dom(d);
    if (dm.residents.empty() && dm.phase == Phase::Idle) dm.loaded = j;
    dm.residents.insert(j);
    jr.domain = d;
    jr.hold = anchor + static_cast<double>(delta) * cfg_.slot_len + jr.profile().segments[jr.seg].offset;
    for (int g : groups) log(t, g, j, "", "place");
  }

  void try_repack(int j, double t) {
    JobRt& jr = job(j);
    SlotProfile profile = jr.slots;
    try {
      ProfilerConfig pc;
      pc.slot_len = cfg_.slot_len;
      profile = to_slots(profile_job(jr.exec_log, pc), cfg_.slot_len);
    } catch (const Error&) {
      // fall back to the trace profile
    }
    const PlacementRequest req = request_for(jr, profile, t);
    PlaceOptions opts;
    opts.accept = make_accept(t);
    opts.order = cfg_.policy == Policy::Pack ? CandidateOrder::FirstFitPacked : CandidateOrder::Interference;
    const int old = jr.domain;
    try {
      const PlacementDecision dec = repack(state_, req, cfg_.placement, opts);
      dom(old).residents.erase(j);
      attach(j, dec.node_group_ids, req.anchor_time, dec.delta, t);
      jr.profiling = false;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoCapacity) throw;
    }
  }

  // Domain runtime --------------------------------------------------------

  ResourceView view_of(const Domain& dm, double t) const {
    ResourceView v;
    v.t_now = t;
    if (dm.loaded >= 0) v.resident_job = jobs_[static_cast<std::size_t>(dm.loaded)].profile().job_id;
    if (dm.phase == Phase::Busy && dm.current) {
      SchedRequest running = *dm.current;
      running.remaining_time = std::clamp(dm.cur_end - t, 0.0, running.exec_estimate_E);
      v.running = running;
    }
    for (const auto& r : dm.pending) v.scheduled.push_back({r, t, t});
    return v;
  }

  void submit(int d, SchedRequest req, double t) {
    Domain& dm = dom(d);
    dm.pending.push_back(std::move(req));
    if (dm.phase == Phase::Idle) {
      dispatch(d, t);
    } else if (dm.phase == Phase::Busy) {
      consider_preempt(d, t);
    }
  }

  void consider_preempt(int d, double t) {
    Domain& dm = dom(d);
    if (dm.decide_scheduled || dm.pending.empty() || dm.phase != Phase::Busy) return;
    const ResourceView plan = replan_with_hrrs(view_of(dm, t), setup_, ReplanMode::Physical);
    if (plan.running) return;
    double t_stop = ceil_slot(t);
    if (t_stop <= dm.cur_start) t_stop = ceil_slot(dm.cur_start + cfg_.slot_len * 0.5);
    if (t_stop >= dm.cur_end) return;
    dm.decide_scheduled = true;
    push(t_stop, Ev::Decide, d);
  }

  void on_decide(int d, double t) {
    Domain& dm = dom(d);
    dm.decide_scheduled = false;
    if (dm.phase != Phase::Busy || t >= dm.cur_end) return;
    const ResourceView plan = replan_with_hrrs(view_of(dm, t), setup_, ReplanMode::Physical);
    if (plan.running) return;
    SchedRequest stopped = *dm.current;
    stopped.remaining_time = std::clamp(dm.cur_end - t, 0.0, stopped.exec_estimate_E);
    const int j = dm.current_job;
    log_domain(dm, t, j, stopped.request_id, "stop");
    record_exec(j, dm.cur_start, t);
    ++preemptions_;
    ++dm.token;
    dm.phase = Phase::Idle;
    dm.current.reset();
    job(j).wait_open = t;
    if (dm.backfill_run) {
      dm.backfill_run = false;
      job(j).pending = stopped;
    } else {
      dm.pending.push_back(stopped);
    }
    dispatch(d, t);
    if (job(j).pending) try_backfill_job(j, t);
  }

  void dispatch(int d, double t) {
    Domain& dm = dom(d);
    if (dm.phase != Phase::Idle || !dm.alive) return;
    if (dm.pending.empty()) {
      if (cfg_.policy == Policy::SpreadBackfill) try_backfill_domain(d, t);
      if (dom(d).phase == Phase::Idle && !admission_.empty()) try_admit(t);
      return;
    }
    const ResourceView plan = replan_with_hrrs(view_of(dm, t), setup_, ReplanMode::Physical);
    const SchedRequest next = plan.scheduled.front().request;
    dm.pending.erase(std::find_if(dm.pending.begin(), dm.pending.end(),
                                  [&next](const SchedRequest& r) { return r.request_id == next.request_id; }));
    start_request(d, index_.at(next.job_id), next, t);
  }

  void start_request(int d, int j, const SchedRequest& req, double t) {
    Domain& dm = dom(d);
    const std::optional<JobId> loaded =
        dm.loaded >= 0 ? std::optional<JobId>(job(dm.loaded).profile().job_id) : std::nullopt;
    const double gap = switch_cost(req.job_id, loaded, setup_);
    if (gap <= 0.0 && dm.loaded == j) {
      begin_exec(d, j, req, t);
      return;
    }
    begin_setup(d, j, t);
    dm.after_setup = req;
    dm.after_setup_job = j;
  }

  // Offload of the loaded job (if any) followed by a load of job `j`.
  void begin_setup(int d, int j, double t) {
    Domain& dm = dom(d);
    double cursor = t;
    if (dm.loaded >= 0) {
      log_domain(dm, cursor, dm.loaded, "", "offload_start");
      cursor += setup_.t_offload;
      log_domain(dm, cursor, dm.loaded, "", "offload_finish");
      ++switches_;
    }
    log_domain(dm, cursor, j, "", "load_start");
    cursor += setup_.t_load;
    log_domain(dm, cursor, j, "", "load_finish");
    dm.phase = Phase::Setup;
    dm.loaded = -1;
    dm.after_setup.reset();
    dm.after_setup_job = j;
    ++dm.token;
    push(cursor, Ev::SetupDone, d, dm.token);
  }

  void on_setup_done(int d, std::uint64_t token, double t) {
    Domain& dm = dom(d);
    if (token != dm.token || dm.phase != Phase::Setup) return;
    dm.loaded = dm.after_setup_job;
    dm.phase = Phase::Idle;
    if (dm.after_setup) {
      const SchedRequest req = *dm.after_setup;
      dm.after_setup.reset();
      begin_exec(d, dm.loaded, req, t);
      return;
    }
    dispatch(d, t);
  }

  void begin_exec(int d, int j, const SchedRequest& req, double t) {
    Domain& dm = dom(d);
    JobRt& jr = job(j);
    dm.loaded = j;
    dm.phase = Phase::Busy;
    dm.current = req;
    dm.current_job = j;
    dm.cur_start = t;
    dm.cur_end = t + req.remaining_time;
    ++dm.token;
    push(dm.cur_end, Ev::Finish, d, dm.token);
    log_domain(dm, t, j, req.request_id, "start");
    if (jr.wait_open >= 0.0) jr.wait += t - jr.wait_open;
    jr.wait_open = -1.0;
    consider_preempt(d, t);
  }

  void record_exec(int j, double start, double end) {
    job(j).exec_log.push_back({job(j).profile().job_id, "train", start, end});
  }

  void on_finish(int d, std::uint64_t token, double t) {
    Domain& dm = dom(d);
    if (token != dm.token || dm.phase != Phase::Busy) return;
    const int j = dm.current_job;
    log_domain(dm, t, j, dm.current->request_id, "finish");
    record_exec(j, dm.cur_start, t);
    dm.current.reset();
    dm.phase = Phase::Idle;
    const bool was_backfill = dm.backfill_run;
    dm.backfill_run = false;
    if (was_backfill) {
      const int prior = dm.restore_to;
      dm.restore_to = -1;
      if (prior >= 0 && dm.residents.count(prior) && !job(prior).done) begin_setup(d, prior, t);
    }
    advance_job(j, t);
    dispatch(d, t);
  }

  // Backfill --------------------------------------------------------------

  double next_resident_demand(const Domain& dm) const {
    double horizon = kInf;
    for (int r : dm.residents) horizon = std::min(horizon, jobs_[static_cast<std::size_t>(r)].next_release);
    return horizon;
  }

  bool backfill_fits(const Domain& dm, const SchedRequest& req, double t) const {
    if (dm.phase != Phase::Idle || !dm.pending.empty() || !dm.alive) return false;
    // A domain whose residents have all finished is about to be handed back
    // to admission.
    if (std::none_of(dm.residents.begin(), dm.residents.end(),
                     [this](int r) { return !jobs_[static_cast<std::size_t>(r)].done; })) {
      return false;
    }
    const int j = index_.at(req.job_id);
    if (static_cast<int>(dm.groups.size()) != jobs_[static_cast<std::size_t>(j)].demand()) return false;
    std::optional<JobId> loaded;
    if (dm.loaded >= 0) loaded = jobs_[static_cast<std::size_t>(dm.loaded)].profile().job_id;
    double need = t + effective_service_time(req, loaded, setup_);
    if (dm.loaded >= 0 && dm.loaded != j) need += setup_.c_setup();
    return need <= next_resident_demand(dm);
  }

  void run_backfill(int d, int j, double t) {
    Domain& dm = dom(d);
    JobRt& jr = job(j);
    SchedRequest req = *jr.pending;
    req.target_wpg = dm.groups.front();
    jr.pending.reset();
    dm.backfill_run = true;
    dm.restore_to = dm.loaded;
    ++backfilled_;
    start_request(d, j, req, t);
  }

  void try_backfill_job(int j, double t) {
    if (cfg_.policy != Policy::SpreadBackfill || !job(j).pending || job(j).domain >= 0) return;
    for (std::size_t d = 0; d < domains_.size(); ++d) {
      if (backfill_fits(domains_[d], *job(j).pending, t)) {
        run_backfill(static_cast<int>(d), j, t);
        return;
      }
    }
  }

  void try_backfill_domain(int d, double t) {
    const Domain& dm = dom(d);
    std::optional<JobId> loaded;
    if (dm.loaded >= 0) loaded = job(dm.loaded).profile().job_id;
    int best = -1;
    double best_score = -kInf;
    for (std::size_t i = 0; i < jobs_.size(); ++i) {
      const JobRt& jr = jobs_[i];
      if (jr.domain >= 0 || !jr.pending || jr.done) continue;
      if (!backfill_fits(dm, *jr.pending, t)) continue;
      const double score = hrrs_priority(*jr.pending, t, loaded, setup_);
      if (score > best_score) {
        best_score = score;
        best = static_cast<int>(i);
      }
    }
    if (best >= 0) run_backfill(d, best, t);
  }

  const SimConfig& cfg_;
  SetupCost setup_;
  ClusterState state_;
  std::vector<JobRt> jobs_;
  std::map<JobId, int> index_;
  std::vector<Domain> domains_;
  std::vector<int> group_domain_;
  std::vector<int> admission_;
  std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  std::mt19937_64 rng_;
  std::vector<SimEvent> events_;
  std::int64_t switches_ = 0;
  std::int64_t backfilled_ = 0;
  std::int64_t preemptions_ = 0;
  PruneStats prune_;
  bool admitting_ = false;
};

}  // namespace

SimReport run_simulation(const WorkloadTrace& trace, const SimConfig& cfg) {
  cfg.validate();
  trace.validate();
  for (const auto& j : trace.jobs) {
    if (j.profile.node_demand > cfg.total_node_groups) {
      throw Error(ErrorCode::ConfigInfeasible, "job '" + j.profile.job_id + "' needs " +
                                                   std::to_string(j.profile.node_demand) +
                                                   " node groups; the cluster has " +
                                                   std::to_string(cfg.total_node_groups));
    }
  }
  Simulator sim(trace, cfg);
  return sim.run();
}

}  // namespace cyclesched
