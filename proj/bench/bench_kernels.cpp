// Serial vs OpenMP step kernels on large grid networks.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "wavesync/simulator.hpp"

using namespace wavesync;

namespace {

/// side x side grid, 4-neighbour edges, every tenth robot accessible.
Scenario grid_scenario(std::size_t side) {
  const std::size_t n = side * side;
  std::vector<std::pair<AgentId, AgentId>> edges;
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const auto i = static_cast<AgentId>(r * side + c);
      if (c + 1 < side) edges.emplace_back(i, i + 1);
      if (r + 1 < side) edges.emplace_back(i, static_cast<AgentId>(i + side));
    }
  }
  std::vector<AgentId> accessible;
  for (std::size_t i = 0; i < n; i += 10) accessible.push_back(static_cast<AgentId>(i));

  Scenario s;
  s.name = "grid";
  s.graph = Graph::build(n, edges, accessible);
  s.gains = Gains::uniform(s.graph, 0.2, 0.05, 1.0);
  s.delay = 0.5;
  s.duration = 1e6;
  s.q_r = {0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = static_cast<double>(i);
    s.initial.push_back({{std::sin(phase), std::cos(phase)}, {}});
  }
  s.biases.assign(n, {});
  return s;
}

void run_steps(benchmark::State& state, ExecPolicy policy) {
  const Scenario s = grid_scenario(static_cast<std::size_t>(state.range(0)));
  WorldState world = initial_world(s);
  for (auto _ : state) {
    world = step(std::move(world), s, {0.1, 0.0}, policy);
    benchmark::DoNotOptimize(world.states.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.graph.size()));
}

void BM_StepSerial(benchmark::State& state) { run_steps(state, ExecPolicy::kSerial); }
void BM_StepParallel(benchmark::State& state) { run_steps(state, ExecPolicy::kParallel); }

}  // namespace

BENCHMARK(BM_StepSerial)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_StepParallel)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
