#include <gtest/gtest.h>

#include <random>

#include "cyclesched/error.hpp"
#include "cyclesched/timeline.hpp"
#include "oracles.hpp"

using namespace cyclesched;

TEST(SlotIndex, Wraps) {
  CapacityProfile p(8);
  EXPECT_EQ(p.slot_index(0.0), 0);
  EXPECT_EQ(p.slot_index(28800.0), 0);
  EXPECT_EQ(p.slot_index(30000.0), 1200);
}

TEST(RangeMin, UniformCapacity) {
  CapacityProfile p(8);
  EXPECT_EQ(p.range_min_capacity(0.0, 100.0), 8);
  EXPECT_EQ(p.range_min_capacity(28000.0, 29000.0), 8);
}

TEST(RangeMin, ReservedBlock) {
  ClusterTimeline t(8);
  t.commit({"a", {0, 1, 2}, {{10, 20}}});
  EXPECT_EQ(t.capacity().range_min_capacity(0.0, 30.0), 5);
  EXPECT_EQ(t.capacity().range_min_capacity(0.0, 10.0), 8);
  EXPECT_EQ(t.capacity().range_min_capacity(19.5, 21.0), 5);
}

TEST(RangeMin, WrappingQueryMatchesScan) {
  ClusterTimeline t(4, 100.0);
  t.commit({"a", {0}, {{97, 100}}});
  t.commit({"b", {1, 2}, {{2, 3}}});
  const auto& free = t.capacity().free_nodes();
  EXPECT_EQ(t.capacity().range_min_capacity(95.0, 105.0), cyclesched::oracle::linear_ring_min(free, 95, 10));
  EXPECT_EQ(t.capacity().range_min_capacity(95.0, 105.0), 2);
}

TEST(RangeMin, TooLong) {
  CapacityProfile p(2, 50.0);
  EXPECT_THROW(p.range_min_capacity(0.0, 51.0), Error);
  EXPECT_NO_THROW(p.range_min_capacity(10.0, 60.0));
}

TEST(FitSegment, Examples) {
  IntervalSet w({{0, 20}});
  EXPECT_TRUE(fit_segment(w, 5, 10));
  EXPECT_FALSE(fit_segment(w, 15, 10));
}

TEST(FitSegment, RandomAgainstLinearScan) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    const Slot len = 200;
    std::vector<SlotRange> ws;
    Slot cursor = 0;
    while (cursor < len) {
      Slot gap = std::uniform_int_distribution<Slot>(0, 15)(rng);
      Slot w = std::uniform_int_distribution<Slot>(1, 30)(rng);
      ws.push_back({cursor + gap, std::min(len, cursor + gap + w)});
      cursor += gap + w;
    }
    IntervalSet set(ws);
    auto mask = cyclesched::oracle::free_mask(set, len);
    Slot s = std::uniform_int_distribution<Slot>(0, len - 1)(rng);
    Slot d = std::uniform_int_distribution<Slot>(1, 40)(rng);
    ASSERT_EQ(fit_segment(set, s, d), cyclesched::oracle::linear_fit(mask, s, d)) << s << '+' << d;
  }
}

TEST(IntervalSet, AllocateReleaseRestores) {
  IntervalSet w = IntervalSet::full(100);
  const IntervalSet before = w;
  w.allocate({10, 20});
  w.allocate({20, 30});
  w.allocate({50, 60});
  EXPECT_FALSE(w.fits(15, 1));
  EXPECT_EQ(w.windows().size(), 3u);
  w.release({20, 30});
  w.release({50, 60});
  w.release({10, 20});
  EXPECT_EQ(w, before);
  EXPECT_THROW(w.allocate({90, 110}), Error);
  EXPECT_THROW(w.release({0, 5}), Error);
}

TEST(IntervalSet, NextFitStart) {
  IntervalSet w({{0, 5}, {10, 30}, {40, 45}});
  EXPECT_EQ(w.next_fit_start(2, 3), 2);
  EXPECT_EQ(w.next_fit_start(2, 4), 10);
  EXPECT_EQ(w.next_fit_start(12, 18), 12);
  EXPECT_FALSE(w.next_fit_start(12, 21).has_value());
}

TEST(Reservation, PeriodicCommitMatchesSlotOracle) {
  ClusterTimeline t(8, 300.0);
  SlotProfile prof{100, {{0, 10}}};
  Reservation r{"a", {0}, project_occupancy(prof, 0, 0, 300, 3)};
  t.commit(r);
  cyclesched::oracle::SlotLedger ledger(8, 300);
  ledger.commit(r);
  EXPECT_EQ(t.capacity().free_nodes(), ledger.free_counts());
  for (Slot s : {0, 9, 100, 109, 200, 209}) EXPECT_EQ(t.capacity().free_at(s), 7) << s;
  for (Slot s : {10, 99, 110, 210, 299}) EXPECT_EQ(t.capacity().free_at(s), 8) << s;
}

TEST(Reservation, ReleaseIsBitIdentical) {
  ClusterTimeline t(8, 300.0);
  const ClusterTimeline before = t;
  t.commit({"a", {1, 3}, {{5, 50}, {250, 300}}});
  EXPECT_FALSE(t == before);
  Reservation back = t.release("a");
  EXPECT_EQ(back.node_group_ids, (std::vector<int>{1, 3}));
  EXPECT_TRUE(t == before);
  EXPECT_THROW(t.release("a"), Error);
}

TEST(Reservation, OverCommitLeavesStateUntouched) {
  ClusterTimeline t(8, 100.0);
  t.commit({"a", {0}, {{0, 10}}});
  const ClusterTimeline before = t;
  try {
    t.commit({"big", {0, 1, 2, 3, 4, 5, 6, 7, 8}, {{20, 30}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OverCommit);
  }
  EXPECT_TRUE(t == before);
  EXPECT_THROW(t.commit({"b", {1, 0}, {{50, 60}, {5, 6}}}), Error);
  EXPECT_TRUE(t == before);
  EXPECT_EQ(t.find("b"), nullptr);
}

TEST(Reservation, ProjectionWrapsAndClips) {
  SlotProfile prof{40, {{0, 10}, {30, 10}}};
  auto ranges = project_occupancy(prof, 90, 0, 100, 5);
  Slot total = 0;
  for (const auto& r : ranges) {
    EXPECT_GE(r.begin, 0);
    EXPECT_LE(r.end, 100);
    total += r.length();
  }
  // Relative slots 0..100 hold 10+10+10+10+10 active slots before clipping.
  EXPECT_EQ(total, 50);
  EXPECT_EQ(ring_ranges(95, 10, 100), (std::vector<SlotRange>{{95, 100}, {0, 5}}));
}

TEST(RangeMinTree, EmptyAndSingle) {
  RangeMinTree empty(std::vector<int>{});
  RangeMinTree one(std::vector<int>{4});
  EXPECT_EQ(one.query(0, 1), 4);
}
