#include <gtest/gtest.h>

#include <random>

#include "cyclesched/error.hpp"
#include "cyclesched/placement.hpp"
#include "oracles.hpp"

using namespace cyclesched;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::IoFailure;
}

const std::vector<SlotSegment> kSeg10{{0, 10}};

}  // namespace

TEST(SchedulingCost, Examples) {
  PlacementConfig c;
  std::vector<SlotSegment> full{{0, 100}};
  EXPECT_DOUBLE_EQ(scheduling_cost(0, full, 100, c), 0.0);
  EXPECT_DOUBLE_EQ(scheduling_cost(10, full, 100, c), 0.2);
  c.w1 = 2.0;
  c.w2 = 0.0;
  std::vector<SlotSegment> sixty{{0, 60}};
  EXPECT_DOUBLE_EQ(scheduling_cost(30, sixty, 100, c), -0.2);
}

TEST(MicroShift, FreeWindowsGiveZero) {
  PlacementConfig c;
  std::vector<SlotSegment> full{{0, 100}};
  ShiftResult r = micro_shift_search(full, 100, IntervalSet::full(100), c);
  EXPECT_EQ(r.delta, 0);
  EXPECT_DOUBLE_EQ(r.cost, 0.0);
}

TEST(MicroShift, ShiftsIntoWindows) {
  PlacementConfig c;
  std::vector<SlotSegment> segs{{0, 10}, {50, 10}};
  IntervalSet w({{20, 40}, {70, 100}});
  ShiftResult r = micro_shift_search(segs, 100, w, c);
  EXPECT_EQ(r.delta, 20);
  auto brute = cyclesched::oracle::brute_micro_shift(segs, 100, cyclesched::oracle::free_mask(w, 200), c, 1,
                                                     std::numeric_limits<Slot>::max());
  ASSERT_TRUE(brute);
  EXPECT_EQ(brute->delta, 20);
}

TEST(MicroShift, EmptyWindowsInfeasible) {
  PlacementConfig c;
  EXPECT_EQ(code_of([&] { micro_shift_search(kSeg10, 100, IntervalSet{}, c); }), ErrorCode::NoFeasibleShift);
}

TEST(MicroShift, RespectsShiftBound) {
  PlacementConfig c;
  c.alpha = 0.1;
  IntervalSet w({{20, 40}});
  EXPECT_EQ(code_of([&] { micro_shift_search(kSeg10, 100, w, c); }), ErrorCode::NoFeasibleShift);
  c.alpha = 0.2;
  EXPECT_EQ(micro_shift_search(kSeg10, 100, w, c).delta, 20);
}

TEST(MicroShift, RandomAgainstBruteForce) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const Slot period = std::uniform_int_distribution<Slot>(5, 200)(rng);
    const std::int64_t periods = std::uniform_int_distribution<int>(1, 3)(rng);
    const Slot len = period * (periods + 1);
    std::vector<SlotRange> ws;
    for (Slot s = 0; s < len;) {
      Slot w = std::uniform_int_distribution<Slot>(1, period)(rng);
      Slot gap = std::uniform_int_distribution<Slot>(0, period / 4 + 1)(rng);
      ws.push_back({s, std::min(len, s + w)});
      s += w + gap;
    }
    IntervalSet set(ws);
    Slot d = std::uniform_int_distribution<Slot>(1, std::max<Slot>(1, period / 3))(rng);
    Slot a = std::uniform_int_distribution<Slot>(0, period - d)(rng);
    std::vector<SlotSegment> segs{{a, d}};
    PlacementConfig c;
    c.alpha = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
    c.w1 = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    c.w2 = std::uniform_real_distribution<double>(0.01, 2.0)(rng);
    const Slot horizon = std::uniform_int_distribution<Slot>(period, len)(rng);
    ShiftSearchOptions o{periods, horizon, nullptr};
    auto expected = cyclesched::oracle::brute_micro_shift(segs, period, cyclesched::oracle::free_mask(set, len), c,
                                                          periods, horizon);
    try {
      ShiftResult got = micro_shift_search(segs, period, set, c, o);
      ASSERT_TRUE(expected) << "trial " << trial;
      EXPECT_EQ(got.delta, expected->delta) << "trial " << trial;
      EXPECT_NEAR(got.cost, expected->cost, 1e-12);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::NoFeasibleShift);
      EXPECT_FALSE(expected) << "trial " << trial;
    }
  }
}

TEST(GangFeasible, Examples) {
  ClusterTimeline t(8, 1000.0);
  EXPECT_TRUE(gang_feasible(t.capacity(), 1, 0.0, 100.0));
  t.commit({"x", {3}, {{50, 60}}});
  EXPECT_FALSE(gang_feasible(t.capacity(), 8, 0.0, 100.0));
  EXPECT_TRUE(gang_feasible(t.capacity(), 8, 60.0, 100.0));
  EXPECT_TRUE(gang_feasible(t.capacity(), 0, 0.0, 100.0));
}

TEST(Interference, RankingExamples) {
  SlotProfile job{100, {{0, 10}}};
  PlacementConfig cfg;
  // Resident busy on [0,10) overlaps fully; [95,100)+[0,5) overlaps 5.
  ResidentPattern full{{100, {{0, 10}}}, 0, {true}};
  ResidentPattern five{{100, {{5, 10}}}, 0, {true}};
  ResidentPattern eight{{100, {{2, 10}}}, 0, {true}};
  EXPECT_EQ(interference_score(job, 0, std::vector<ResidentPattern>{five}, false), 5.0);

  std::vector<InterferenceCandidate> a{{0, 0, 0.0, {full}}, {1, 0, 0.0, {}}};
  auto r = rank_by_interference(a, job, cfg);
  EXPECT_EQ(r.front().group, 1);
  EXPECT_EQ(r.back().interference, 10.0);

  std::vector<InterferenceCandidate> b{{0, 0, 0.0, {five, five}}, {1, 0, 0.0, {eight}}};
  r = rank_by_interference(b, job, cfg);
  EXPECT_EQ(r.front().group, 1);
  EXPECT_EQ(r.front().interference, 8.0);
  EXPECT_EQ(r.back().interference, 10.0);

  std::vector<InterferenceCandidate> c{{0, 0, 0.3, {}}, {1, 0, 0.1, {}}};
  r = rank_by_interference(c, job, cfg);
  EXPECT_EQ(r.front().group, 1);
}

TEST(Interference, CriticalWeighting) {
  SlotProfile job{100, {{0, 10}}};
  ResidentPattern crit{{100, {{0, 4}, {6, 4}}}, 0, {true, false}};
  std::vector<ResidentPattern> rs{crit};
  EXPECT_EQ(interference_score(job, 0, rs, false), 8.0);
  EXPECT_EQ(interference_score(job, 0, rs, true), 12.0);
}

TEST(PlaceJob, ColdReservesDedicatedGroups) {
  ClusterState s(8, 1000.0);
  PlacementRequest req{"j", {100, {{0, 50}}}, 2, 5, 0.0};
  PlaceOptions o;
  o.profiling_slots = 300;
  PlacementDecision d = place_job(s, req, PlacementConfig{}, StartMode::Cold, o);
  EXPECT_EQ(d.mode, StartMode::Cold);
  EXPECT_EQ(d.node_group_ids, (std::vector<int>{0, 1}));
  EXPECT_EQ(s.timeline.capacity().free_at(0), 6);
  EXPECT_EQ(s.timeline.capacity().free_at(299), 6);
  EXPECT_EQ(s.timeline.capacity().free_at(300), 8);
  EXPECT_TRUE(s.placed.at("j").dedicated);
  EXPECT_TRUE(s.shared_domains().empty());
}

TEST(PlaceJob, WarmShiftsPastResident) {
  ClusterState s(1, 400.0);
  PlacementConfig cfg;
  place_job(s, {"a", {100, {{0, 40}}}, 1, 4, 0.0}, cfg, StartMode::Warm);
  PlacementDecision d = place_job(s, {"b", {100, {{0, 30}}}, 1, 4, 0.0}, cfg, StartMode::Warm);
  EXPECT_EQ(d.delta, 40);
  EXPECT_EQ(d.node_group_ids, (std::vector<int>{0}));
  EXPECT_EQ(s.timeline.capacity().free_at(40), 0);
  EXPECT_EQ(s.timeline.capacity().free_at(70), 1);
  EXPECT_EQ(s.timeline.capacity().free_at(140), 0);
}

TEST(PlaceJob, SaturatedClusterIsAtomic) {
  ClusterState s(1, 400.0);
  PlacementConfig cfg;
  place_job(s, {"a", {100, {{0, 80}}}, 1, 4, 0.0}, cfg, StartMode::Warm);
  const ClusterTimeline before = s.timeline;
  EXPECT_EQ(code_of([&] { place_job(s, {"b", {100, {{0, 30}}}, 1, 4, 0.0}, cfg, StartMode::Warm); }),
            ErrorCode::NoCapacity);
  EXPECT_TRUE(s.timeline == before);
  EXPECT_EQ(s.placed.size(), 1u);
}

TEST(PlaceJob, SpreadPrefersFreshGroupsPackSharesFirst) {
  PlacementConfig cfg;
  for (auto order : {CandidateOrder::Interference, CandidateOrder::FirstFitPacked}) {
    ClusterState s(2, 400.0);
    PlaceOptions o;
    o.order = order;
    place_job(s, {"a", {100, {{0, 50}}}, 1, 4, 0.0}, cfg, StartMode::Warm, o);
    PlacementDecision d = place_job(s, {"b", {100, {{50, 50}}}, 1, 4, 0.0}, cfg, StartMode::Warm, o);
    if (order == CandidateOrder::Interference) {
      EXPECT_EQ(d.node_group_ids, (std::vector<int>{1}));
    } else {
      EXPECT_EQ(d.node_group_ids, (std::vector<int>{0}));
    }
    EXPECT_EQ(d.delta, 0);
    EXPECT_EQ(d.interference, 0.0);
  }
}

TEST(PlaceJob, AcceptCallbackFilters) {
  ClusterState s(2, 400.0);
  PlaceOptions o;
  o.accept = [](const std::vector<int>& g, Slot) { return g.front() != 0; };
  PlacementDecision d = place_job(s, {"a", {100, {{0, 50}}}, 1, 4, 0.0}, PlacementConfig{}, StartMode::Warm, o);
  EXPECT_EQ(d.node_group_ids, (std::vector<int>{1}));
}

TEST(PlaceJob, CommittedOccupancyMatchesSlotOracle) {
  std::mt19937_64 rng(9);
  ClusterState s(4, 600.0);
  cyclesched::oracle::SlotLedger ledger(4, 600);
  PlacementConfig cfg;
  int placed = 0;
  for (int i = 0; i < 40; ++i) {
    Slot period = std::uniform_int_distribution<Slot>(20, 150)(rng);
    Slot d = std::uniform_int_distribution<Slot>(1, period / 2)(rng);
    Slot a = std::uniform_int_distribution<Slot>(0, period - d)(rng);
    int k = std::uniform_int_distribution<int>(1, 2)(rng);
    double anchor = static_cast<double>(std::uniform_int_distribution<int>(0, 1000)(rng));
    PlacementRequest req{"j" + std::to_string(i), {period, {{a, d}}}, k, 100, anchor};
    try {
      place_job(s, req, cfg, StartMode::Warm);
      ++placed;
      ledger.commit(*s.timeline.find(req.job_id));
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::NoCapacity);
    }
    ASSERT_EQ(s.timeline.capacity().free_nodes(), ledger.free_counts());
    for (int g = 0; g < 4; ++g) {
      ASSERT_EQ(cyclesched::oracle::free_mask(s.timeline.group_windows(g), 600), ledger.group_free(g));
    }
  }
  EXPECT_GT(placed, 2);
}

TEST(Repack, AntiPhasePairSharesOneGroup) {
  ClusterState s(2, 1000.0);
  PlacementConfig cfg;
  place_job(s, {"a", {100, {{0, 50}}}, 1, 10, 0.0}, cfg, StartMode::Warm);
  PlaceOptions cold;
  cold.profiling_slots = 200;
  place_job(s, {"b", {}, 1, 10, 0.0}, cfg, StartMode::Cold, cold);
  EXPECT_EQ(s.placed.at("b").node_group_ids, (std::vector<int>{1}));
  PlaceOptions pack;
  pack.order = CandidateOrder::FirstFitPacked;
  PlacementDecision d = repack(s, {"b", {100, {{50, 50}}}, 1, 10, 0.0}, cfg, pack);
  EXPECT_EQ(d.node_group_ids, (std::vector<int>{0}));
  EXPECT_EQ(s.timeline.empty_groups(), (std::vector<int>{1}));
  EXPECT_EQ(s.timeline.capacity().range_min_capacity(0.0, 1000.0), 1);
}

TEST(Repack, FailureRestoresDedicatedPlacement) {
  PlacementConfig cfg;
  ClusterState busy(2, 400.0);
  place_job(busy, {"a", {100, {{0, 90}}}, 1, 4, 0.0}, cfg, StartMode::Warm);
  place_job(busy, {"b", {}, 1, 4, 0.0}, cfg, StartMode::Cold);
  const ClusterTimeline before = busy.timeline;
  EXPECT_EQ(code_of([&] { repack(busy, {"b", {100, {{0, 50}}}, 2, 4, 0.0}, cfg); }), ErrorCode::NoCapacity);
  EXPECT_TRUE(busy.timeline == before);
  EXPECT_TRUE(busy.placed.at("b").dedicated);
}

TEST(Repack, MissingProfileIsPrecondition) {
  ClusterState s(1, 400.0);
  place_job(s, {"b", {}, 1, 4, 0.0}, PlacementConfig{}, StartMode::Cold);
  EXPECT_EQ(code_of([&] { repack(s, {"b", {}, 1, 4, 0.0}, PlacementConfig{}); }), ErrorCode::PreconditionFailed);
  EXPECT_EQ(code_of([&] { repack(s, {"zz", {100, {{0, 5}}}, 1, 4, 0.0}, PlacementConfig{}); }),
            ErrorCode::PreconditionFailed);
}

TEST(PlacementConfig, Validation) {
  PlacementConfig c;
  EXPECT_NO_THROW(c.validate());
  c.w1 = c.w2 = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = PlacementConfig{};
  c.alpha = 1.5;
  EXPECT_THROW(c.validate(), Error);
}
