#include "cyclesched/placement.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <tuple>

#include "cyclesched/error.hpp"

namespace cyclesched {

void PlacementConfig::validate() const {
  if (w1 < 0.0 || w2 < 0.0 || (w1 == 0.0 && w2 == 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "placement weights must be >= 0 and not both 0");
  }
  if (!(alpha > 0.0) || alpha > 1.0) throw Error(ErrorCode::InvalidConfig, "alpha must lie in (0, 1]");
  if (max_overlap_fraction < 0.0 || max_overlap_fraction > 1.0) {
    throw Error(ErrorCode::InvalidConfig, "max_overlap_fraction must lie in [0, 1]");
  }
}

double scheduling_cost(Slot delta, std::span<const SlotSegment> segments, Slot period,
                       const PlacementConfig& cfg) {
  Slot max_end = 0;
  for (const auto& s : segments) max_end = std::max(max_end, s.end());
  const double t = static_cast<double>(period);
  const double t_end = static_cast<double>(delta + max_end);
  return cfg.w1 * (t_end - t) / t + cfg.w2 * static_cast<double>(delta) / t;
}

ShiftResult micro_shift_search(std::span<const SlotSegment> segments, Slot period,
                               const IntervalSet& windows, const PlacementConfig& cfg,
                               const ShiftSearchOptions& opts) {
  if (segments.empty()) throw Error(ErrorCode::PreconditionFailed, "no segments to place");
  const auto max_delta = static_cast<Slot>(std::floor(cfg.alpha * static_cast<double>(period) + 1e-9));

  // With w1, w2 >= 0 the cost is non-decreasing in delta, so the first
  // feasible delta is the optimum and also the smallest among equal costs.
  Slot delta = 0;
  while (delta <= max_delta) {
    if (opts.admissible != nullptr) {
      const auto& mask = *opts.admissible;
      if (delta >= static_cast<Slot>(mask.size()) || !mask[static_cast<std::size_t>(delta)]) {
        ++delta;
        continue;
      }
    }
    bool feasible = true;
    Slot next = delta + 1;
    for (std::int64_t p = 0; p < opts.periods && feasible; ++p) {
      const Slot base = p * period + delta;
      if (base >= opts.horizon) break;
      for (const auto& seg : segments) {
        const Slot begin = base + seg.offset;
        if (begin >= opts.horizon) break;
        const Slot end = std::min(opts.horizon, begin + seg.duration);
        if (windows.fits(begin, end - begin)) continue;
        feasible = false;
        // Jump ahead only when clipping cannot shorten this segment for any
        // remaining delta; otherwise step.
        const bool never_clipped = begin + seg.duration + (max_delta - delta) <= opts.horizon;
        if (never_clipped) {
          auto nf = windows.next_fit_start(begin, seg.duration);
          next = nf ? std::max(next, delta + (*nf - begin)) : max_delta + 1;
        }
        break;
      }
    }
    if (feasible) return {delta, scheduling_cost(delta, segments, period, cfg)};
    delta = next;
  }
  throw Error(ErrorCode::NoFeasibleShift, "no shift in [0, " + std::to_string(max_delta) + "] fits");
}

bool gang_feasible(const CapacityProfile& profile, int k, double t0, double d) {
  if (k <= 0) return true;
  return profile.range_min_capacity(t0, t0 + d) >= k;
}

namespace {

// Weight of resident activity at relative slot x, 0 when idle.
int resident_weight(const ResidentPattern& r, Slot x, bool weighting) {
  const Slot p = r.profile.period;
  const Slot local = (((x - r.phase) % p) + p) % p;
  const auto& segs = r.profile.segments;
  auto it = std::upper_bound(segs.begin(), segs.end(), local,
                             [](Slot v, const SlotSegment& s) { return v < s.offset; });
  if (it == segs.begin()) return 0;
  --it;
  if (local >= it->end()) return 0;
  if (!weighting) return 1;
  const auto idx = static_cast<std::size_t>(it - segs.begin());
  return idx < r.critical.size() && r.critical[idx] ? 2 : 1;
}

}  // namespace

double interference_score(const SlotProfile& job, Slot delta,
                          std::span<const ResidentPattern> residents, bool weighting) {
  double total = 0.0;
  for (const auto& r : residents) {
    for (const auto& seg : job.segments) {
      for (Slot x = delta + seg.offset; x < delta + seg.end(); ++x) {
        total += resident_weight(r, x, weighting);
      }
    }
  }
  return total;
}

std::vector<RankedCandidate> rank_by_interference(std::span<const InterferenceCandidate> candidates,
                                                  const SlotProfile& job,
                                                  const PlacementConfig& cfg) {
  std::vector<RankedCandidate> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    out.push_back({c.group, c.delta, c.cost,
                   interference_score(job, c.delta, c.residents, cfg.interference_weighting)});
  }
  std::stable_sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    return std::tie(a.interference, a.cost, a.group) < std::tie(b.interference, b.cost, b.group);
  });
  return out;
}

std::vector<JobId> ClusterState::residents_of(int group) const {
  std::vector<JobId> out;
  for (const auto& [id, pj] : placed) {
    if (std::find(pj.node_group_ids.begin(), pj.node_group_ids.end(), group) != pj.node_group_ids.end()) {
      out.push_back(id);
    }
  }
  return out;
}

std::vector<std::vector<int>> ClusterState::shared_domains() const {
  std::set<std::vector<int>> seen;
  for (const auto& [id, pj] : placed) {
    if (pj.dedicated) continue;
    auto groups = pj.node_group_ids;
    std::sort(groups.begin(), groups.end());
    seen.insert(std::move(groups));
  }
  return {seen.begin(), seen.end()};
}

IntervalSet relative_windows(const IntervalSet& ring_windows, Slot anchor, Slot ring_size) {
  std::vector<SlotRange> rel;
  for (const auto& w : ring_windows.windows()) {
    for (const auto& r : ring_ranges(w.begin - anchor, w.length(), ring_size)) rel.push_back(r);
  }
  return IntervalSet(std::move(rel));
}

namespace {

// Disjoint sets of k empty groups, in group order.
std::vector<std::vector<int>> fresh_sets(const ClusterState& state, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  for (int g = 0; g < state.timeline.group_count(); ++g) {
    if (!state.residents_of(g).empty()) continue;
    cur.push_back(g);
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  return out;
}

std::int64_t projected_periods(const PlacementRequest& job, Slot horizon) {
  const std::int64_t cap = horizon / job.profile.period + 1;
  return std::max<std::int64_t>(1, std::min(job.periods, cap));
}

struct Candidate {
  std::vector<int> groups;
  ShiftResult shift;
  double interference = 0.0;
};

PlacementDecision commit_candidate(ClusterState& state, const PlacementRequest& job,
                                   const Candidate& c, Slot anchor_slot, std::int64_t periods) {
  const Slot ring = state.timeline.capacity().slots();
  Reservation res{job.job_id, c.groups,
                  project_occupancy(job.profile, anchor_slot, c.shift.delta, ring, periods)};
  state.timeline.commit(res);
  state.placed[job.job_id] = PlacedJob{c.groups, job.profile, job.anchor_time, c.shift.delta,
                                       StartMode::Warm, false};
  return {job.job_id, c.groups, c.shift.delta, c.shift.cost, StartMode::Warm, c.interference};
}

}  // namespace

PlacementDecision place_job(ClusterState& state, const PlacementRequest& job,
                            const PlacementConfig& cfg, StartMode mode, const PlaceOptions& opts,
                            PruneStats* stats) {
  const int k = job.node_demand;
  if (state.placed.count(job.job_id)) {
    throw Error(ErrorCode::PreconditionFailed, "job '" + job.job_id + "' is already placed");
  }
  const CapacityProfile& cap = state.timeline.capacity();
  const Slot ring = cap.slots();
  const Slot anchor_slot = cap.slot_index(job.anchor_time);

  if (mode == StartMode::Cold) {
    const auto sets = fresh_sets(state, k);
    if (sets.empty()) {
      throw Error(ErrorCode::NoCapacity, "fewer than " + std::to_string(k) + " empty node groups");
    }
    auto chosen = std::find_if(sets.begin(), sets.end(), [&](const std::vector<int>& g) {
      return !opts.accept || opts.accept(g, 0);
    });
    if (chosen == sets.end()) {
      throw Error(ErrorCode::NoCapacity, "dedicated groups rejected by admission");
    }
    const std::vector<int>& groups = *chosen;
    const Slot length = opts.profiling_slots > 0 ? std::min(opts.profiling_slots, ring) : ring;
    Reservation res{job.job_id, groups, ring_ranges(anchor_slot, length, ring)};
    state.timeline.commit(res);
    state.placed[job.job_id] =
        PlacedJob{groups, job.profile, job.anchor_time, 0, StartMode::Cold, true};
    return {job.job_id, groups, 0, 0.0, StartMode::Cold, 0.0};
  }

  if (job.profile.segments.empty()) {
    throw Error(ErrorCode::PreconditionFailed, "warm placement needs a profile");
  }
  const std::int64_t periods = projected_periods(job, ring);
  const auto max_delta =
      static_cast<Slot>(std::floor(cfg.alpha * static_cast<double>(job.profile.period) + 1e-9));

  // Global prune: a delta survives only if every projected occurrence sees
  // at least K free groups on the capacity profile.
  std::vector<bool> admissible(static_cast<std::size_t>(max_delta + 1), true);
  // Same occurrences as project_occupancy, walked without materializing them.
  auto survives = [&](Slot d) {
    for (std::int64_t p = 0; p < periods; ++p) {
      const Slot base = p * job.profile.period + d;
      if (base >= ring) break;
      for (const auto& seg : job.profile.segments) {
        const Slot rel_begin = base + seg.offset;
        if (rel_begin >= ring) break;
        const Slot rel_end = std::min(ring, rel_begin + seg.duration);
        if (cap.min_over_slots(anchor_slot + rel_begin, rel_end - rel_begin) < k) return false;
      }
    }
    return true;
  };
  for (Slot d = 0; d <= max_delta; ++d) admissible[static_cast<std::size_t>(d)] = survives(d);
  const auto pruned = std::count(admissible.begin(), admissible.end(), false);

  // Packing tries shared domains before fresh groups; interference ranking
  // lists fresh groups first so that ties spread work out.
  std::vector<std::vector<int>> domains;
  const auto fresh = fresh_sets(state, k);
  if (opts.order == CandidateOrder::Interference) domains = fresh;
  for (auto& d : state.shared_domains()) {
    if (static_cast<int>(d.size()) == k) domains.push_back(std::move(d));
  }
  if (opts.order == CandidateOrder::FirstFitPacked) domains.insert(domains.end(), fresh.begin(), fresh.end());

  if (stats) {
    stats->deltas_considered += static_cast<std::int64_t>(domains.size()) * (max_delta + 1);
    stats->deltas_pruned += static_cast<std::int64_t>(domains.size()) * pruned;
  }

  ShiftSearchOptions search{periods, ring, &admissible};
  std::vector<Candidate> feasible;
  // Empty groups share identical windows, so one search covers all of them.
  std::optional<std::optional<ShiftResult>> fresh_shift;
  for (const auto& groups : domains) {
    const bool is_fresh = state.residents_of(groups.front()).empty();
    std::optional<ShiftResult> found;
    if (is_fresh && fresh_shift) {
      found = *fresh_shift;
    } else {
      IntervalSet rel = relative_windows(state.timeline.group_windows(groups.front()), anchor_slot, ring);
      try {
        found = micro_shift_search(job.profile.segments, job.profile.period, rel, cfg, search);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoFeasibleShift) throw;
      }
      if (is_fresh) fresh_shift = found;
    }
    if (!found) continue;
    const ShiftResult shift = *found;
    if (opts.accept && !opts.accept(groups, shift.delta)) continue;
    Candidate c{groups, shift, 0.0};
    if (opts.order == CandidateOrder::FirstFitPacked) {
      return commit_candidate(state, job, c, anchor_slot, periods);
    }
    feasible.push_back(std::move(c));
  }
  if (feasible.empty()) {
    throw Error(ErrorCode::NoCapacity, "no node group admits job '" + job.job_id + "'");
  }

  std::vector<InterferenceCandidate> ranked_in;
  for (std::size_t i = 0; i < feasible.size(); ++i) {
    InterferenceCandidate ic{static_cast<int>(i), feasible[i].shift.delta, feasible[i].shift.cost, {}};
    for (int g : feasible[i].groups) {
      for (const JobId& rid : state.residents_of(g)) {
        const PlacedJob& r = state.placed.at(rid);
        const double offset_s = r.anchor_time - job.anchor_time;
        const Slot phase = static_cast<Slot>(std::llround(offset_s / cap.slot_len())) + r.delta;
        ic.residents.push_back({r.profile, phase, std::vector<bool>(r.profile.segments.size(), true)});
      }
      break;  // every group of a domain hosts the same residents
    }
    ranked_in.push_back(std::move(ic));
  }
  // Candidate index doubles as the group key so ties keep candidate order.
  auto ranked = rank_by_interference(ranked_in, job.profile, cfg);
  Candidate best = feasible[static_cast<std::size_t>(ranked.front().group)];
  best.interference = ranked.front().interference;
  return commit_candidate(state, job, best, anchor_slot, periods);
}

PlacementDecision repack(ClusterState& state, const PlacementRequest& job,
                         const PlacementConfig& cfg, const PlaceOptions& opts) {
  auto it = state.placed.find(job.job_id);
  if (it == state.placed.end() || it->second.mode != StartMode::Cold) {
    throw Error(ErrorCode::PreconditionFailed,
                "job '" + job.job_id + "' has no dedicated cold-start placement");
  }
  if (job.profile.segments.empty() || job.profile.period <= 0) {
    throw Error(ErrorCode::PreconditionFailed, "job '" + job.job_id + "' has no profile");
  }
  const PlacedJob saved = it->second;
  state.placed.erase(it);
  Reservation original = state.timeline.release(job.job_id);
  try {
    return place_job(state, job, cfg, StartMode::Warm, opts);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoCapacity) throw;
    state.timeline.commit(original);
    state.placed[job.job_id] = saved;
    throw;
  }
}

void remove_job(ClusterState& state, const JobId& job_id) {
  if (state.placed.erase(job_id) == 0) throw Error(ErrorCode::UnknownJob, "job '" + job_id + "' is not placed");
  state.timeline.release(job_id);
}

}  // namespace cyclesched
