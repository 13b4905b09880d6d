#include "cyclesched/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "cyclesched/error.hpp"

namespace cyclesched {

// ---------------------------------------------------------------------------
// IntervalSet

IntervalSet::IntervalSet(std::vector<SlotRange> windows) {
  std::sort(windows.begin(), windows.end(),
            [](const SlotRange& a, const SlotRange& b) { return a.begin < b.begin; });
  for (const auto& w : windows) {
    if (w.length() <= 0) continue;
    if (!windows_.empty() && windows_.back().end >= w.begin) {
      windows_.back().end = std::max(windows_.back().end, w.end);
    } else {
      windows_.push_back(w);
    }
  }
}

IntervalSet IntervalSet::full(Slot length) {
  IntervalSet s;
  if (length > 0) s.windows_.push_back({0, length});
  return s;
}

bool IntervalSet::fits(Slot start, Slot duration) const {
  // Last window whose begin is <= start.
  auto it = std::upper_bound(windows_.begin(), windows_.end(), start,
                             [](Slot v, const SlotRange& w) { return v < w.begin; });
  if (it == windows_.begin()) return false;
  --it;
  return start + duration <= it->end;
}

std::optional<Slot> IntervalSet::next_fit_start(Slot start, Slot duration) const {
  auto it = std::upper_bound(windows_.begin(), windows_.end(), start,
                             [](Slot v, const SlotRange& w) { return v < w.begin; });
  if (it != windows_.begin()) {
    auto prev = std::prev(it);
    if (start + duration <= prev->end) return start;
  }
  for (; it != windows_.end(); ++it) {
    if (it->length() >= duration) return it->begin;
  }
  return std::nullopt;
}

bool IntervalSet::contains_slot(Slot s) const { return fits(s, 1); }

void IntervalSet::allocate(SlotRange r) {
  if (r.length() <= 0) return;
  auto it = std::upper_bound(windows_.begin(), windows_.end(), r.begin,
                             [](Slot v, const SlotRange& w) { return v < w.begin; });
  if (it == windows_.begin() || std::prev(it)->end < r.end) {
    throw Error(ErrorCode::OverCommit, "range is not free");
  }
  --it;
  SlotRange w = *it;
  std::vector<SlotRange> parts;
  if (w.begin < r.begin) parts.push_back({w.begin, r.begin});
  if (r.end < w.end) parts.push_back({r.end, w.end});
  it = windows_.erase(it);
  windows_.insert(it, parts.begin(), parts.end());
}

void IntervalSet::release(SlotRange r) {
  if (r.length() <= 0) return;
  auto it = std::lower_bound(windows_.begin(), windows_.end(), r.begin,
                             [](const SlotRange& w, Slot v) { return w.end < v; });
  // `it` is the first window that ends at or after r.begin.
  if (it != windows_.end() && it->begin < r.end && it->end > r.begin) {
    throw Error(ErrorCode::PreconditionFailed, "released range overlaps a free window");
  }
  SlotRange merged = r;
  auto first = it;
  auto last = it;
  if (last != windows_.end() && last->end == r.begin) {
    merged.begin = last->begin;
    ++last;
  }
  if (last != windows_.end() && last->begin == r.end) {
    merged.end = last->end;
    ++last;
  }
  it = windows_.erase(first, last);
  windows_.insert(it, merged);
}

bool fit_segment(const IntervalSet& intervals, Slot start, Slot duration) {
  return intervals.fits(start, duration);
}

// ---------------------------------------------------------------------------
// RangeMinTree

RangeMinTree::RangeMinTree(const std::vector<int>& values)
    : size_(values.size()), tree_(2 * values.size(), std::numeric_limits<int>::max()) {
  std::copy(values.begin(), values.end(), tree_.begin() + static_cast<std::ptrdiff_t>(size_));
  for (std::size_t i = size_; i-- > 1;) tree_[i] = std::min(tree_[2 * i], tree_[2 * i + 1]);
}

int RangeMinTree::query(std::size_t lo, std::size_t hi) const {
  int best = std::numeric_limits<int>::max();
  for (lo += size_, hi += size_; lo < hi; lo >>= 1, hi >>= 1) {
    if (lo & 1) best = std::min(best, tree_[lo++]);
    if (hi & 1) best = std::min(best, tree_[--hi]);
  }
  return best;
}

void RangeMinTree::set(std::size_t index, int value) {
  std::size_t i = index + size_;
  tree_[i] = value;
  for (i >>= 1; i >= 1; i >>= 1) tree_[i] = std::min(tree_[2 * i], tree_[2 * i + 1]);
}

void RangeMinTree::set_range(std::size_t lo, std::size_t hi, const std::vector<int>& values) {
  if (lo >= hi) return;
  for (std::size_t i = lo; i < hi; ++i) tree_[i + size_] = values[i];
  std::size_t l = (lo + size_) >> 1;
  std::size_t r = (hi - 1 + size_) >> 1;
  while (r >= 1) {
    for (std::size_t i = std::max<std::size_t>(l, 1); i <= r; ++i) {
      tree_[i] = std::min(tree_[2 * i], tree_[2 * i + 1]);
    }
    l >>= 1;
    r >>= 1;
  }
}

// ---------------------------------------------------------------------------
// CapacityProfile

CapacityProfile::CapacityProfile(int total_nodes, double horizon_s, double slot_len)
    : total_nodes_(total_nodes),
      slot_len_(slot_len),
      slots_(ceil_slots(horizon_s, slot_len)) {
  if (total_nodes < 0) throw Error(ErrorCode::InvalidConfig, "total_nodes must be >= 0");
  if (!(slot_len > 0.0) || slots_ < 1) throw Error(ErrorCode::InvalidConfig, "empty horizon");
  free_.assign(static_cast<std::size_t>(slots_), total_nodes);
  index_ = RangeMinTree(free_);
}

Slot CapacityProfile::slot_index(double t_abs) const {
  return floor_slots(t_abs, slot_len_) % slots_;
}

int CapacityProfile::min_over_slots(Slot ring_start, Slot length) const {
  if (length <= 0) return std::numeric_limits<int>::max();
  const Slot begin = ((ring_start % slots_) + slots_) % slots_;
  const Slot end = begin + length;
  if (end <= slots_) return index_.query(static_cast<std::size_t>(begin), static_cast<std::size_t>(end));
  return std::min(index_.query(static_cast<std::size_t>(begin), static_cast<std::size_t>(slots_)),
                  index_.query(0, static_cast<std::size_t>(end - slots_)));
}

int CapacityProfile::range_min_capacity(double t0, double t1) const {
  Slot first = floor_slots(t0, slot_len_);
  Slot last = ceil_slots(t1, slot_len_);
  Slot length = std::max<Slot>(1, last - first);
  if (length > slots_) {
    throw Error(ErrorCode::RangeTooLong, "query spans " + std::to_string(length) +
                                             " slots, horizon has " + std::to_string(slots_));
  }
  return min_over_slots(first % slots_, length);
}

void CapacityProfile::adjust(SlotRange r, int delta) {
  for (Slot s = r.begin; s < r.end; ++s) free_[static_cast<std::size_t>(s)] += delta;
  index_.set_range(static_cast<std::size_t>(r.begin), static_cast<std::size_t>(r.end), free_);
}

void CapacityProfile::rebuild_index() { index_ = RangeMinTree(free_); }

void CapacityProfile::dump_csv(std::ostream& out) const {
  out << "slot,free_nodes\n";
  for (std::size_t i = 0; i < free_.size(); ++i) out << i << ',' << free_[i] << '\n';
}

// ---------------------------------------------------------------------------
// Projection helpers

std::vector<SlotRange> ring_ranges(Slot ring_start, Slot length, Slot ring_size) {
  std::vector<SlotRange> out;
  if (length <= 0) return out;
  Slot begin = ((ring_start % ring_size) + ring_size) % ring_size;
  Slot end = begin + length;
  if (end <= ring_size) {
    out.push_back({begin, end});
  } else {
    out.push_back({begin, ring_size});
    out.push_back({0, end - ring_size});
  }
  return out;
}

std::vector<SlotRange> project_occupancy(const SlotProfile& profile, Slot anchor_slot, Slot delta,
                                         Slot horizon_slots, std::int64_t max_periods) {
  std::vector<SlotRange> out;
  for (std::int64_t p = 0; p < max_periods; ++p) {
    const Slot base = p * profile.period + delta;
    if (base >= horizon_slots) break;
    for (const auto& seg : profile.segments) {
      Slot rel_begin = base + seg.offset;
      if (rel_begin >= horizon_slots) break;
      Slot rel_end = std::min(horizon_slots, rel_begin + seg.duration);
      for (const auto& r : ring_ranges(anchor_slot + rel_begin, rel_end - rel_begin, horizon_slots)) {
        out.push_back(r);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// ClusterTimeline

ClusterTimeline::ClusterTimeline(int total_nodes, double horizon_s, double slot_len)
    : capacity_(total_nodes, horizon_s, slot_len),
      groups_(static_cast<std::size_t>(total_nodes), IntervalSet::full(capacity_.slots())) {}

const IntervalSet& ClusterTimeline::group_windows(int group) const {
  return groups_.at(static_cast<std::size_t>(group));
}

void ClusterTimeline::commit(const Reservation& res) {
  const int k = static_cast<int>(res.node_group_ids.size());
  if (k > capacity_.total_nodes()) {
    throw Error(ErrorCode::OverCommit, "job '" + res.job_id + "' needs " + std::to_string(k) +
                                           " groups, cluster has " +
                                           std::to_string(capacity_.total_nodes()));
  }
  if (reservations_.count(res.job_id)) {
    throw Error(ErrorCode::OverCommit, "job '" + res.job_id + "' already holds a reservation");
  }
  for (int g : res.node_group_ids) {
    if (g < 0 || g >= group_count()) {
      throw Error(ErrorCode::OverCommit, "node group " + std::to_string(g) + " does not exist");
    }
  }

  // Validate everything against scratch copies before touching live state.
  std::vector<IntervalSet> scratch;
  scratch.reserve(res.node_group_ids.size());
  for (int g : res.node_group_ids) scratch.push_back(groups_[static_cast<std::size_t>(g)]);
  std::vector<int> demand(static_cast<std::size_t>(capacity_.slots()), 0);
  for (const auto& r : res.occupied) {
    if (r.begin < 0 || r.end > capacity_.slots() || r.length() <= 0) {
      throw Error(ErrorCode::OverCommit, "range outside the horizon");
    }
    for (auto& windows : scratch) {
      if (!windows.fits(r.begin, r.length())) {
        throw Error(ErrorCode::OverCommit, "range [" + std::to_string(r.begin) + ", " +
                                               std::to_string(r.end) + ") is not free");
      }
      windows.allocate(r);
    }
    for (Slot s = r.begin; s < r.end; ++s) demand[static_cast<std::size_t>(s)] += k;
  }
  for (Slot s = 0; s < capacity_.slots(); ++s) {
    if (capacity_.free_at(s) - demand[static_cast<std::size_t>(s)] < 0) {
      throw Error(ErrorCode::OverCommit, "slot " + std::to_string(s) + " would go negative");
    }
  }

  for (std::size_t i = 0; i < res.node_group_ids.size(); ++i) {
    groups_[static_cast<std::size_t>(res.node_group_ids[i])] = std::move(scratch[i]);
  }
  for (const auto& r : res.occupied) capacity_.adjust(r, -k);
  reservations_.emplace(res.job_id, res);
}

Reservation ClusterTimeline::release(const JobId& job_id) {
  auto it = reservations_.find(job_id);
  if (it == reservations_.end()) throw Error(ErrorCode::UnknownJob, "no reservation for '" + job_id + "'");
  Reservation res = std::move(it->second);
  reservations_.erase(it);
  const int k = static_cast<int>(res.node_group_ids.size());
  for (const auto& r : res.occupied) {
    for (int g : res.node_group_ids) groups_[static_cast<std::size_t>(g)].release(r);
    capacity_.adjust(r, k);
  }
  return res;
}

const Reservation* ClusterTimeline::find(const JobId& job_id) const {
  auto it = reservations_.find(job_id);
  return it == reservations_.end() ? nullptr : &it->second;
}

std::vector<int> ClusterTimeline::empty_groups() const {
  std::vector<int> out;
  for (int g = 0; g < group_count(); ++g) {
    const auto& w = groups_[static_cast<std::size_t>(g)].windows();
    if (w.size() == 1 && w.front().begin == 0 && w.front().end == capacity_.slots()) out.push_back(g);
  }
  return out;
}

}  // namespace cyclesched
