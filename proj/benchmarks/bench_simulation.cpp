#include <benchmark/benchmark.h>

#include "cyclesched/simulator.hpp"

using namespace cyclesched;

namespace {

void BM_Simulate(benchmark::State& state) {
  GeneratorSpec spec;
  spec.job_count = static_cast<int>(state.range(0));
  spec.period_min = 200;
  spec.period_max = 600;
  spec.period_quantum = 10;
  spec.duty_min = 0.2;
  spec.duty_max = 0.5;
  spec.node_demand_max = 2;
  spec.cycles_min = 10;
  spec.cycles_max = 30;
  spec.mean_interarrival = 200;
  spec.anti_phase = true;
  spec.random_offset = true;
  const WorkloadTrace trace = synthesize_workload(spec, 7);
  SimConfig cfg;
  cfg.total_node_groups = 4;
  cfg.policy = static_cast<Policy>(state.range(1));
  std::size_t events = 0;
  for (auto _ : state) {
    SimReport r = run_simulation(trace, cfg);
    events = r.events.size();
    benchmark::DoNotOptimize(r.makespan);
  }
  state.SetLabel(to_string(cfg.policy));
  state.counters["events"] = static_cast<double>(events);
}
BENCHMARK(BM_Simulate)
    ->ArgsProduct({{20, 80}, {static_cast<int>(Policy::Isolated), static_cast<int>(Policy::Spread),
                              static_cast<int>(Policy::SpreadBackfill)}})
    ->Unit(benchmark::kMillisecond);

}  // namespace
