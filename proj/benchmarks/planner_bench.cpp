// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "innet/orchestrator.hpp"

namespace {

// One sweep case per run: topology family and size from the default sweep,
// program length from the range argument.
void BM_PlanSweepCase(benchmark::State& state) {
  const auto cases = innet::default_bench_cases();
  const innet::BenchCase c = cases[static_cast<std::size_t>(state.range(0))];
  for (auto _ : state) {
    auto r = innet::bench_planner({c}, 1);
    benchmark::DoNotOptimize(r);
  }
  const auto r = innet::bench_planner({c}, 1).front();
  state.SetLabel(r.label + "/" + std::to_string(c.program_stages));
  state.counters["paths"] = static_cast<double>(r.paths);
  state.counters["devices"] = r.devices;
}
BENCHMARK(BM_PlanSweepCase)->DenseRange(0, 47, 1)->Unit(benchmark::kMillisecond);

void BM_PathEnumerationFatTree(benchmark::State& state) {
  const auto net = innet::fat_tree(static_cast<int>(state.range(0)));
  const int src = net.hosts.front().device;
  const int dst = net.hosts.back().device;
  for (auto _ : state) {
    auto paths = innet::enumerate_device_paths(net, src, dst);
    benchmark::DoNotOptimize(paths);
  }
}
BENCHMARK(BM_PathEnumerationFatTree)->Arg(4)->Arg(12)->Arg(20)->Unit(benchmark::kMicrosecond);

}  // namespace
