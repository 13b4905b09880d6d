#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cyclesched/error.hpp"
#include "cyclesched/trace.hpp"

namespace cyclesched {

namespace {

struct Busy {
  double start;
  double end;
  std::string phase;
};

// Device-active intervals, merged when separated by less than one slot.
std::vector<Busy> merge_device_events(std::vector<ExecutionEvent> events, double slot_len) {
  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
  std::vector<Busy> out;
  for (const auto& ev : events) {
    if (is_rollout_phase(ev.phase)) continue;
    if (!out.empty() && ev.start - out.back().end < slot_len) {
      out.back().end = std::max(out.back().end, ev.end);
    } else {
      out.push_back({ev.start, ev.end, ev.phase});
    }
  }
  return out;
}

// Fraction of busy slots that disagree with the indicator shifted by `lag`.
// Idle-vs-idle agreement is ignored so long gaps cannot mask a mismatch.
// Returns a negative value when the overlap holds no busy slot.
double mismatch_fraction(const std::vector<int>& label, const std::vector<std::size_t>& busy,
                         std::size_t lag) {
  const std::size_t n = label.size();
  std::size_t mismatch = 0;
  std::size_t unioned = 0;
  for (std::size_t t : busy) {
    if (t + lag < n) {
      ++unioned;
      if (label[t] != label[t + lag]) ++mismatch;
    }
    if (t >= lag && label[t - lag] == 0) {
      ++unioned;
      ++mismatch;
    }
  }
  if (unioned == 0) return -1.0;
  return static_cast<double>(mismatch) / static_cast<double>(unioned);
}

// Smallest-mismatch lag of the first valley after the indicator decorrelates
// from itself.
std::size_t detect_period(const std::vector<int>& label, double tolerance) {
  std::vector<std::size_t> busy;
  for (std::size_t t = 0; t < label.size(); ++t) {
    if (label[t] != 0) busy.push_back(t);
  }
  bool decorrelated = false;
  bool in_valley = false;
  std::size_t best_lag = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t lag = 1; lag < label.size(); ++lag) {
    double m = mismatch_fraction(label, busy, lag);
    bool match = m >= 0.0 && m <= tolerance;
    if (!decorrelated) {
      if (!match) decorrelated = true;
      continue;
    }
    if (match) {
      in_valley = true;
      if (m < best) {
        best = m;
        best_lag = lag;
      }
    } else if (in_valley) {
      break;
    }
  }
  if (!in_valley) throw Error(ErrorCode::NoPeriodicity, "no period within jitter tolerance");
  return best_lag;
}

}  // namespace

bool is_rollout_phase(const std::string& phase) {
  return phase.rfind("rollout", 0) == 0 || phase.rfind("generate", 0) == 0;
}

JobProfile profile_job(const std::vector<ExecutionEvent>& events, const ProfilerConfig& cfg) {
  if (events.empty()) throw Error(ErrorCode::InsufficientData, "no execution events");
  const double slot = cfg.slot_len;

  double origin = events.front().start;
  double last_end = events.front().end;
  for (const auto& ev : events) {
    origin = std::min(origin, ev.start);
    last_end = std::max(last_end, ev.end);
  }

  std::vector<Busy> segs = merge_device_events(events, slot);
  if (segs.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "a cycle boundary is never observed");
  }

  std::map<std::string, int> phase_ids;
  for (const auto& ev : events) {
    if (!is_rollout_phase(ev.phase)) phase_ids.emplace(ev.phase, 0);
  }
  int next_id = 1;
  for (auto& [name, id] : phase_ids) id = next_id++;

  const auto span = static_cast<std::size_t>(ceil_slots(last_end - origin, slot));
  std::vector<int> label(span, 0);
  for (const auto& ev : events) {
    if (is_rollout_phase(ev.phase)) continue;
    Slot b = floor_slots(ev.start - origin, slot);
    Slot e = std::min<Slot>(static_cast<Slot>(span), ceil_slots(ev.end - origin, slot));
    for (Slot t = b; t < e; ++t) {
      if (label[static_cast<std::size_t>(t)] == 0) label[static_cast<std::size_t>(t)] = phase_ids[ev.phase];
    }
  }

  const double lag = static_cast<double>(detect_period(label, cfg.jitter_tolerance)) * slot;

  // Segments per cycle: everything that starts before the next cycle could.
  const double first = segs.front().start;
  std::size_t per_cycle = 0;
  while (per_cycle < segs.size() &&
         segs[per_cycle].start - first < lag * (1.0 - cfg.jitter_tolerance)) {
    ++per_cycle;
  }
  const std::size_t chunks = segs.size() / per_cycle;

  // Rollout starts, when present, mark where each cycle begins.
  std::vector<double> anchors;
  {
    std::vector<ExecutionEvent> rollout;
    for (const auto& ev : events) {
      if (is_rollout_phase(ev.phase)) rollout.push_back(ev);
    }
    std::sort(rollout.begin(), rollout.end(),
              [](const auto& a, const auto& b) { return a.start < b.start; });
    double end = -std::numeric_limits<double>::infinity();
    for (const auto& ev : rollout) {
      if (ev.start - end >= slot) anchors.push_back(ev.start);
      end = std::max(end, ev.end);
    }
    bool aligned = anchors.size() == chunks || anchors.size() == chunks + 1;
    for (std::size_t c = 0; aligned && c < chunks; ++c) {
      aligned = anchors[c] <= segs[c * per_cycle].start &&
                (c + 1 >= anchors.size() || anchors[c + 1] >= segs[(c + 1) * per_cycle - 1].end);
    }
    if (!aligned) anchors.clear();
  }

  double period = lag;
  if (anchors.size() >= 2) {
    period = (anchors.back() - anchors.front()) / static_cast<double>(anchors.size() - 1);
  } else if (chunks >= 2) {
    period = (segs[(chunks - 1) * per_cycle].start - first) / static_cast<double>(chunks - 1);
  }
  auto cycle_origin = [&](std::size_t c) {
    return anchors.empty() ? origin + static_cast<double>(c) * period : anchors[c];
  };

  // A cycle is complete once the next one begins or the log runs past its end.
  int complete = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    bool next_seen = (c + 1) * per_cycle < segs.size();
    if (next_seen || last_end + 1e-9 >= segs[c * per_cycle].start + period) ++complete;
  }
  if (complete < cfg.min_cycles) {
    throw Error(ErrorCode::InsufficientData,
                "observed " + std::to_string(complete) + " complete cycle(s), need " +
                    std::to_string(cfg.min_cycles));
  }

  JobProfile profile;
  profile.job_id = events.front().job_id;
  profile.period = period;
  for (std::size_t i = 0; i < per_cycle; ++i) {
    double offset = 0.0;
    double duration = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) {
      const Busy& b = segs[c * per_cycle + i];
      offset += b.start - cycle_origin(c);
      duration += b.end - b.start;
    }
    profile.segments.push_back(
        {offset / static_cast<double>(chunks), duration / static_cast<double>(chunks)});
  }

  // Every observed segment, including a trailing partial cycle, has to agree
  // with the averaged pattern.
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const std::size_t c = k / per_cycle;
    const Segment& want = profile.segments[k % per_cycle];
    const double at = anchors.size() > c ? segs[k].start - anchors[c]
                                         : segs[k].start - origin - static_cast<double>(c) * period;
    const double dur = segs[k].end - segs[k].start;
    if (std::abs(at - want.offset) > cfg.jitter_tolerance * period + slot ||
        std::abs(dur - want.duration) > cfg.jitter_tolerance * want.duration + slot) {
      throw Error(ErrorCode::NoPeriodicity, "busy intervals do not repeat with a common pattern");
    }
  }

  // Offsets are normalized modulo the period; a pattern that would wrap past
  // the period end is re-anchored at its first segment.
  double base = std::floor(profile.segments.front().offset / period) * period;
  for (auto& s : profile.segments) s.offset -= base;
  const Segment& tail = profile.segments.back();
  if (tail.offset + tail.duration > period + 1e-9) {
    double shift = profile.segments.front().offset;
    for (auto& s : profile.segments) s.offset -= shift;
  }

  for (const auto& ev : events) profile.phase_costs[ev.phase] += ev.end - ev.start;
  for (auto& [name, secs] : profile.phase_costs) secs /= static_cast<double>(chunks);

  profile.validate();
  return profile;
}

}  // namespace cyclesched
