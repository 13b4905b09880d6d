#include <gtest/gtest.h>

#include "cyclesched/error.hpp"
#include "cyclesched/metrics.hpp"
#include "cyclesched/report.hpp"

using namespace cyclesched;

TEST(BubbleRatio, PerModelReference) {
  // Reference values are quoted in percent with two decimals.
  EXPECT_NEAR(bubble_ratio(289.03, {9.66, 38.08, 9.76}), 0.8010, 1e-4);
  EXPECT_NEAR(bubble_ratio(284.80, {19.62, 56.35, 7.57}), 0.7067, 1e-4);
  EXPECT_NEAR(bubble_ratio(589.71, {20.11, 82.39, 8.89}), 0.8111, 1e-4);
  EXPECT_NEAR(round4(bubble_ratio(284.80, {19.62, 56.35, 7.57})), 0.7067, 1e-12);
}

TEST(BubbleRatio, Errors) {
  EXPECT_THROW(bubble_ratio(10.0, {6.0, 5.0}), Error);
  EXPECT_THROW(bubble_ratio(0.0, {}), Error);
  EXPECT_DOUBLE_EQ(bubble_ratio(10.0, {10.0}), 0.0);
  EXPECT_DOUBLE_EQ(bubble_ratio(10.0, {}), 1.0);
}

TEST(BubbleRatio, JobProfileIgnoresRollout) {
  JobProfile p{"j", 100.0, {{60.0, 40.0}}, 1, 0, {{"rollout", 60.0}, {"update_actor", 30.0}, {"sync_weight", 10.0}}};
  EXPECT_DOUBLE_EQ(job_bubble_ratio(p), 0.6);
  p.phase_costs.clear();
  EXPECT_DOUBLE_EQ(job_bubble_ratio(p), 0.6);
}

TEST(DelayCdf, StepsAndTies) {
  EXPECT_EQ(delay_cdf({0.0}), (std::vector<CdfPoint>{{0.0, 1.0}}));
  auto c = delay_cdf({0.5, 0.0, 0.5, 2.0});
  EXPECT_EQ(c, (std::vector<CdfPoint>{{0.0, 0.25}, {0.5, 0.75}, {2.0, 1.0}}));
  EXPECT_TRUE(delay_cdf({}).empty());
}

namespace {

std::vector<SimEvent> two_request_log() {
  // One job, two requests on group 0; the second waits 10 s and is
  // preempted once for 5 s.
  return {
      {0, -1, "j", "", "arrive"},
      {0, -1, "j", "j/c0/s0", "release"},
      {0, 0, "j", "j/c0/s0", "start"},
      {10, 0, "j", "j/c0/s0", "finish"},
      {20, -1, "j", "j/c1/s0", "release"},
      {30, 0, "j", "j/c1/s0", "start"},
      {35, 0, "j", "j/c1/s0", "stop"},
      {40, 0, "j", "j/c1/s0", "start"},
      {45, 0, "j", "j/c1/s0", "finish"},
      {50, -1, "j", "", "complete"},
  };
}

}  // namespace

TEST(ComputeMetrics, WaitAndDuration) {
  MetricsSummary m = compute_metrics(two_request_log(), 1, 0.5);
  ASSERT_EQ(m.jobs.size(), 1u);
  EXPECT_DOUBLE_EQ(m.jobs[0].wait_time, 15.0);
  EXPECT_DOUBLE_EQ(m.jobs[0].job_duration, 20.0);
  EXPECT_DOUBLE_EQ(m.jobs[0].normalized_delay, 0.75);
  EXPECT_DOUBLE_EQ(m.jobs[0].wait_fraction, 0.3);
  EXPECT_FALSE(m.jobs[0].slo_violation);
  EXPECT_DOUBLE_EQ(m.makespan, 50.0);
  EXPECT_DOUBLE_EQ(m.group_utilization[0], 0.4);
  EXPECT_TRUE(compute_metrics(two_request_log(), 1, 0.2).jobs[0].slo_violation);
}

TEST(ComputeMetrics, DelayEqualToDurationIsOne) {
  std::vector<SimEvent> log{{0, -1, "j", "", "arrive"}, {0, -1, "j", "r", "release"},
                            {10, 0, "j", "r", "start"},  {20, 0, "j", "r", "finish"},
                            {20, -1, "j", "", "complete"}};
  EXPECT_DOUBLE_EQ(compute_metrics(log, 1, 0.5).jobs[0].normalized_delay, 1.0);
}

TEST(ComputeMetrics, GangRecordsCountOnce) {
  std::vector<SimEvent> log{{0, -1, "j", "", "arrive"}, {0, -1, "j", "r", "release"},
                            {0, 0, "j", "r", "start"},   {0, 1, "j", "r", "start"},
                            {8, 0, "j", "r", "finish"},  {8, 1, "j", "r", "finish"},
                            {8, -1, "j", "", "complete"}};
  MetricsSummary m = compute_metrics(log, 2, 0.5);
  EXPECT_DOUBLE_EQ(m.jobs[0].job_duration, 8.0);
  EXPECT_DOUBLE_EQ(m.group_utilization[0], 1.0);
  EXPECT_DOUBLE_EQ(m.group_utilization[1], 1.0);
}

TEST(ComputeMetrics, IncompleteLogs) {
  auto log = two_request_log();
  log.erase(log.begin() + 8);  // final finish
  EXPECT_THROW(compute_metrics(log, 1, 0.5), Error);
  auto no_release = two_request_log();
  no_release.erase(no_release.begin() + 1);
  EXPECT_THROW(compute_metrics(no_release, 1, 0.5), Error);
  auto no_complete = two_request_log();
  no_complete.pop_back();
  EXPECT_THROW(compute_metrics(no_complete, 1, 0.5), Error);
}

TEST(ComputeMetrics, UncontendedCdfIsStepAtZero) {
  std::vector<SimEvent> log{{0, -1, "j", "", "arrive"}, {0, -1, "j", "r", "release"},
                            {0, 0, "j", "r", "start"},   {5, 0, "j", "r", "finish"},
                            {5, -1, "j", "", "complete"}};
  EXPECT_EQ(compute_metrics(log, 1, 0.5).cdf, (std::vector<CdfPoint>{{0.0, 1.0}}));
}
