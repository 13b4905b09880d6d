#include <benchmark/benchmark.h>

#include <random>

#include "cyclesched/error.hpp"
#include "cyclesched/placement.hpp"

using namespace cyclesched;

namespace {

PlacementRequest random_job(std::mt19937_64& rng, int i) {
  const Slot period = std::uniform_int_distribution<Slot>(60, 600)(rng);
  const Slot d = std::uniform_int_distribution<Slot>(5, period / 3)(rng);
  const Slot a = std::uniform_int_distribution<Slot>(0, period - d)(rng);
  return {"j" + std::to_string(i), {period, {{a, d}}}, std::uniform_int_distribution<int>(1, 2)(rng), 20, 0.0};
}

void BM_MicroShift(benchmark::State& state) {
  const Slot period = state.range(0);
  std::mt19937_64 rng(11);
  // Mostly free, with short busy blocks scattered through it.
  std::vector<SlotRange> free;
  for (Slot s = 0; s < 4 * period;) {
    const Slot w = std::uniform_int_distribution<Slot>(period / 4, period)(rng);
    free.push_back({s, std::min(4 * period, s + w)});
    s += w + std::uniform_int_distribution<Slot>(1, std::max<Slot>(1, period / 20))(rng);
  }
  const IntervalSet windows(free);
  const std::vector<SlotSegment> segs{{0, period / 10}, {period / 2, period / 20}};
  PlacementConfig cfg;
  ShiftSearchOptions opts{3, 4 * period, nullptr};
  std::int64_t feasible = 0;
  for (auto _ : state) {
    try {
      benchmark::DoNotOptimize(micro_shift_search(segs, period, windows, cfg, opts));
      ++feasible;
    } catch (const Error&) {
    }
  }
  state.counters["feasible"] = benchmark::Counter(static_cast<double>(feasible), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_MicroShift)->Arg(100)->Arg(1000)->Arg(10000);

// Warm placement of a stream of jobs; reports how many candidate shifts the
// capacity-profile prune discarded.
void BM_PlaceJobStream(benchmark::State& state) {
  const int jobs = static_cast<int>(state.range(0));
  PruneStats stats;
  for (auto _ : state) {
    ClusterState cluster(4, 7200.0);
    std::mt19937_64 rng(21);
    for (int i = 0; i < jobs; ++i) {
      try {
        place_job(cluster, random_job(rng, i), PlacementConfig{}, StartMode::Warm, {}, &stats);
      } catch (const Error&) {
      }
    }
  }
  state.counters["pruned_fraction"] =
      stats.deltas_considered ? static_cast<double>(stats.deltas_pruned) / static_cast<double>(stats.deltas_considered)
                              : 0.0;
}
BENCHMARK(BM_PlaceJobStream)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
