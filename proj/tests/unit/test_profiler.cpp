#include <gtest/gtest.h>

#include <random>

#include "cyclesched/error.hpp"
#include "cyclesched/trace.hpp"

using namespace cyclesched;

TEST(Profiler, TwoSegmentCycles) {
  std::vector<ExecutionEvent> ev;
  for (int c = 0; c < 2; ++c) {
    ev.push_back({"j", "update_actor", 100.0 * c, 100.0 * c + 10});
    ev.push_back({"j", "sync_weight", 100.0 * c + 50, 100.0 * c + 60});
  }
  JobProfile p = profile_job(ev);
  EXPECT_NEAR(p.period, 100.0, 1e-9);
  ASSERT_EQ(p.segments.size(), 2u);
  EXPECT_NEAR(p.segments[0].offset, 0.0, 1e-9);
  EXPECT_NEAR(p.segments[0].duration, 10.0, 1e-9);
  EXPECT_NEAR(p.segments[1].offset, 50.0, 1e-9);
  EXPECT_NEAR(p.segments[1].duration, 10.0, 1e-9);
}

TEST(Profiler, EmptyIsInsufficientData) {
  try {
    profile_job({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
}

TEST(Profiler, JitteredCyclesAverage) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> j(-0.02, 0.02);
  std::vector<ExecutionEvent> ev;
  double sum_off = 0.0, sum_dur = 0.0;
  const int cycles = 6;
  for (int c = 0; c < cycles; ++c) {
    double off = 20.0 * (1.0 + j(rng));
    double dur = 40.0 * (1.0 + j(rng));
    sum_off += off;
    sum_dur += dur;
    ev.push_back({"j", "rollout", 100.0 * c, 100.0 * c + off});
    ev.push_back({"j", "update_actor", 100.0 * c + off, 100.0 * c + off + dur});
  }
  JobProfile p = profile_job(ev);
  EXPECT_NEAR(p.period, 100.0, 1e-9);
  ASSERT_EQ(p.segments.size(), 1u);
  EXPECT_NEAR(p.segments[0].offset, sum_off / cycles, 1e-9);
  EXPECT_NEAR(p.segments[0].duration, sum_dur / cycles, 1e-9);
}

TEST(Profiler, FixtureLog) {
  auto ev = parse_events(std::filesystem::path(CYCLESCHED_FIXTURES) / "phase_events.jsonl");
  JobProfile p = profile_job(ev);
  EXPECT_NEAR(p.period, 100.0, 1e-9);
  ASSERT_EQ(p.segments.size(), 1u);
  EXPECT_NEAR(p.segments[0].offset, 60.0, 1e-9);
  EXPECT_NEAR(p.segments[0].duration, 40.0, 1e-9);
  EXPECT_NEAR(p.phase_costs.at("update_actor"), 30.0, 1e-9);
}

TEST(Profiler, SingleBurstHasNoCycleBoundary) {
  std::vector<ExecutionEvent> ev{{"j", "update_actor", 0.0, 10.0}};
  EXPECT_THROW(profile_job(ev), Error);
}

TEST(Profiler, AperiodicLogRejected) {
  std::vector<ExecutionEvent> ev{{"j", "update_actor", 0.0, 10.0},
                                 {"j", "update_actor", 13.0, 60.0},
                                 {"j", "update_actor", 200.0, 202.0}};
  try {
    profile_job(ev);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::NoPeriodicity || e.code() == ErrorCode::InsufficientData);
  }
}

TEST(Profiler, MinCyclesEnforced) {
  std::vector<ExecutionEvent> ev;
  for (int c = 0; c < 2; ++c) ev.push_back({"j", "update_actor", 100.0 * c, 100.0 * c + 30});
  ProfilerConfig cfg;
  cfg.min_cycles = 5;
  try {
    profile_job(ev, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
}
