#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cyclesched/error.hpp"
#include "cyclesched/trace.hpp"

using namespace cyclesched;

TEST(Synth, SingleJobDuty) {
  GeneratorSpec s;
  s.period_min = s.period_max = 100.0;
  s.duty_min = s.duty_max = 0.5;
  WorkloadTrace t = synthesize_workload(s, 7);
  ASSERT_EQ(t.jobs.size(), 1u);
  ASSERT_EQ(t.jobs[0].profile.segments.size(), 1u);
  EXPECT_DOUBLE_EQ(t.jobs[0].profile.segments[0].duration, 50.0);
}

TEST(Synth, Deterministic) {
  GeneratorSpec s;
  s.job_count = 12;
  s.period_min = 100;
  s.period_max = 900;
  s.duty_min = 0.1;
  s.duty_max = 0.9;
  s.cycles_max = 40;
  s.mean_interarrival = 50;
  s.random_offset = true;
  EXPECT_EQ(synthesize_workload(s, 11), synthesize_workload(s, 11));
  EXPECT_NE(synthesize_workload(s, 11), synthesize_workload(s, 12));
}

TEST(Synth, AntiPhasePair) {
  GeneratorSpec s;
  s.job_count = 2;
  s.period_min = s.period_max = 200.0;
  s.duty_min = s.duty_max = 0.5;
  s.anti_phase = true;
  WorkloadTrace t = synthesize_workload(s, 0);
  EXPECT_EQ(t.jobs[0].profile.segments, (std::vector<Segment>{{0.0, 100.0}}));
  EXPECT_EQ(t.jobs[1].profile.segments, (std::vector<Segment>{{100.0, 100.0}}));
}

TEST(Synth, InvalidDutyRejected) {
  GeneratorSpec s;
  s.duty_min = s.duty_max = 1.5;
  try {
    synthesize_workload(s, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidSpec);
  }
}

TEST(Synth, SpecParsing) {
  std::istringstream in(R"({"job_count": 3, "period_min": 50, "period_max": 60})");
  GeneratorSpec s = parse_generator_spec(in);
  EXPECT_EQ(s.job_count, 3);
  EXPECT_EQ(s.period_max, 60.0);
  std::istringstream bad(R"({"job_count": "three"})");
  EXPECT_THROW(parse_generator_spec(bad), Error);
}

TEST(Synth, GeneratedTracesValidate) {
  GeneratorSpec s;
  s.job_count = 50;
  s.period_min = 10;
  s.period_max = 1000;
  s.period_quantum = 10;
  s.duty_min = 0.05;
  s.duty_max = 1.0;
  s.node_demand_max = 4;
  s.random_offset = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    WorkloadTrace t = synthesize_workload(s, seed);
    EXPECT_NO_THROW(t.validate());
    for (const auto& j : t.jobs) EXPECT_EQ(std::fmod(j.profile.period, 10.0), 0.0);
  }
}
