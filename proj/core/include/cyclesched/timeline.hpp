#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "cyclesched/trace.hpp"

namespace cyclesched {

/// Half-open slot range [begin, end).
struct SlotRange {
  Slot begin = 0;
  Slot end = 0;

  Slot length() const { return end - begin; }
  bool operator==(const SlotRange&) const = default;
};

/// Sorted, disjoint, non-adjacent free windows of one node group.
///
/// Adjacent windows are always coalesced, so allocate() followed by release()
/// of the same range restores an identical set.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<SlotRange> windows);

  /// One window covering [0, length).
  static IntervalSet full(Slot length);

  /// True iff some window contains [start, start + duration). O(log M).
  bool fits(Slot start, Slot duration) const;

  /// First window that could still hold `duration` slots starting at or after
  /// `start`; its begin clamped up to `start`. Used to skip infeasible shifts.
  std::optional<Slot> next_fit_start(Slot start, Slot duration) const;

  /// Removes [r.begin, r.end); the whole range must currently be free.
  void allocate(SlotRange r);
  /// Returns [r.begin, r.end) to the free set; none of it may be free.
  void release(SlotRange r);

  bool contains_slot(Slot s) const;
  const std::vector<SlotRange>& windows() const { return windows_; }
  bool empty() const { return windows_.empty(); }

  bool operator==(const IntervalSet&) const = default;

 private:
  std::vector<SlotRange> windows_;
};

bool fit_segment(const IntervalSet& intervals, Slot start, Slot duration);

/// Iterative min segment tree over a fixed array.
class RangeMinTree {
 public:
  RangeMinTree() = default;
  explicit RangeMinTree(const std::vector<int>& values);

  /// Minimum over [lo, hi); lo < hi.
  int query(std::size_t lo, std::size_t hi) const;
  void set(std::size_t index, int value);
  /// Pushes leaf changes for [lo, hi) up to the root in one pass per level.
  void set_range(std::size_t lo, std::size_t hi, const std::vector<int>& values);

  bool operator==(const RangeMinTree&) const = default;

 private:
  std::size_t size_ = 0;
  std::vector<int> tree_;
};

/// Cyclic cluster timeline: free node groups per slot over the planning
/// horizon, with range-minimum queries.
class CapacityProfile {
 public:
  CapacityProfile(int total_nodes, double horizon_s = 28800.0, double slot_len = 1.0);

  int total_nodes() const { return total_nodes_; }
  double slot_len() const { return slot_len_; }
  double horizon() const { return static_cast<double>(slots_) * slot_len_; }
  Slot slots() const { return slots_; }

  int free_at(Slot ring_index) const { return free_[static_cast<std::size_t>(ring_index)]; }
  const std::vector<int>& free_nodes() const { return free_; }

  /// floor(t_abs / slot_len) mod L.
  Slot slot_index(double t_abs) const;

  /// Minimum free count over the slots covering [t0, t1); wrapping ranges are
  /// answered with at most two tree queries. Throws RangeTooLong if the span
  /// exceeds the horizon.
  int range_min_capacity(double t0, double t1) const;

  /// Minimum over `length` ring slots starting at `ring_start` (may wrap).
  int min_over_slots(Slot ring_start, Slot length) const;

  /// Adds `delta` to every slot in the non-wrapping ring range. The caller is
  /// responsible for bounds; see ClusterTimeline for the checked path.
  void adjust(SlotRange ring_range, int delta);

  /// Discards the index and builds it again from free_nodes.
  void rebuild_index();

  /// "slot,free_nodes" rows with a header.
  void dump_csv(std::ostream& out) const;

  bool operator==(const CapacityProfile&) const = default;

 private:
  int total_nodes_;
  double slot_len_;
  Slot slots_;
  std::vector<int> free_;
  RangeMinTree index_;
};

/// A committed footprint: the same ring ranges are occupied on every listed
/// node group. Ranges never wrap; a wrapping occurrence is stored as two.
struct Reservation {
  JobId job_id;
  std::vector<int> node_group_ids;
  std::vector<SlotRange> occupied;
};

/// Expands a slot profile into ring ranges over one horizon starting at
/// `anchor_slot`, shifted by `delta`. At most `max_periods` periods are
/// projected and anything past the horizon is clipped.
std::vector<SlotRange> project_occupancy(const SlotProfile& profile, Slot anchor_slot, Slot delta,
                                         Slot horizon_slots, std::int64_t max_periods);

/// Splits a possibly wrapping ring range of `length` slots.
std::vector<SlotRange> ring_ranges(Slot ring_start, Slot length, Slot ring_size);

/// Capacity profile plus the per-group free windows and the live
/// reservations. Mutated only through commit/release, which are atomic.
class ClusterTimeline {
 public:
  ClusterTimeline(int total_nodes, double horizon_s = 28800.0, double slot_len = 1.0);

  const CapacityProfile& capacity() const { return capacity_; }
  const IntervalSet& group_windows(int group) const;
  int group_count() const { return static_cast<int>(groups_.size()); }

  /// Throws OverCommit (state untouched) if any range does not fit on every
  /// listed group or would drive a slot's free count below zero.
  void commit(const Reservation& reservation);
  /// Undoes a commit exactly. Throws UnknownJob if nothing is reserved.
  Reservation release(const JobId& job_id);

  const Reservation* find(const JobId& job_id) const;
  const std::map<JobId, Reservation>& reservations() const { return reservations_; }

  /// Groups with no slot reserved at all.
  std::vector<int> empty_groups() const;

  bool operator==(const ClusterTimeline& other) const {
    return capacity_ == other.capacity_ && groups_ == other.groups_;
  }

 private:
  CapacityProfile capacity_;
  std::vector<IntervalSet> groups_;
  std::map<JobId, Reservation> reservations_;
};

}  // namespace cyclesched
