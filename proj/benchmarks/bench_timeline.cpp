#include <benchmark/benchmark.h>

#include <random>

#include "cyclesched/error.hpp"
#include "cyclesched/timeline.hpp"

using namespace cyclesched;

namespace {

// A timeline with `fill` random reservations on `groups` groups.
ClusterTimeline busy_timeline(int groups, double horizon, int fill, std::uint64_t seed) {
  ClusterTimeline tl(groups, horizon, 1.0);
  std::mt19937_64 rng(seed);
  const Slot slots = tl.capacity().slots();
  for (int i = 0; i < fill; ++i) {
    Reservation r{"r" + std::to_string(i), {std::uniform_int_distribution<int>(0, groups - 1)(rng)}, {}};
    const Slot at = std::uniform_int_distribution<Slot>(0, slots - 200)(rng);
    r.occupied.push_back({at, at + std::uniform_int_distribution<Slot>(1, 150)(rng)});
    try {
      tl.commit(r);
    } catch (const Error&) {
    }
  }
  return tl;
}

void BM_RangeMin(benchmark::State& state) {
  const double horizon = static_cast<double>(state.range(0));
  ClusterTimeline tl = busy_timeline(16, horizon, 2000, 1);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> at(0.0, horizon);
  std::uniform_real_distribution<double> span(1.0, horizon / 4);
  for (auto _ : state) {
    const double a = at(rng);
    benchmark::DoNotOptimize(tl.capacity().range_min_capacity(a, a + span(rng)));
  }
}
BENCHMARK(BM_RangeMin)->Arg(3600)->Arg(28800)->Arg(86400);

void BM_FitSegment(benchmark::State& state) {
  const double horizon = static_cast<double>(state.range(0));
  ClusterTimeline tl = busy_timeline(4, horizon, 4000, 3);
  const IntervalSet& windows = tl.group_windows(0);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<Slot> at(0, static_cast<Slot>(horizon) - 1);
  std::uniform_int_distribution<Slot> len(1, 100);
  for (auto _ : state) benchmark::DoNotOptimize(fit_segment(windows, at(rng), len(rng)));
  state.counters["windows"] = static_cast<double>(windows.windows().size());
}
BENCHMARK(BM_FitSegment)->Arg(3600)->Arg(28800)->Arg(86400);

void BM_CommitRelease(benchmark::State& state) {
  ClusterTimeline tl = busy_timeline(16, 28800.0, 1000, 5);
  Reservation r{"probe", {15}, {}};
  for (Slot s = 0; s + 50 < 28800; s += 400) r.occupied.push_back({s + 300, s + 350});
  tl.release("r0");
  for (auto _ : state) {
    ClusterTimeline copy = tl;
    try {
      copy.commit(r);
      copy.release("probe");
    } catch (const Error&) {
    }
    benchmark::DoNotOptimize(copy);
  }
}
BENCHMARK(BM_CommitRelease);

}  // namespace
