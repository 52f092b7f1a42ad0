// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "innet/network.hpp"
#include "innet/orchestrator.hpp"

namespace {

void BM_PacketEncodeDecode(benchmark::State& state) {
  innet::PacketLayout l;
  l.feature_count = static_cast<int>(state.range(0));
  l.value_bits = 16;
  l.kind = innet::IntermediateKind::kTree;
  l.tree_slots = 4;
  innet::Packet p;
  p.features.assign(static_cast<std::size_t>(l.feature_count), 0x1234);
  p.intermediates = innet::empty_intermediates(l);
  for (auto _ : state) {
    auto bytes = innet::encode(p, l);
    auto back = innet::decode(bytes, l);
    benchmark::DoNotOptimize(back);
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * l.request_bytes()));
}
BENCHMARK(BM_PacketEncodeDecode)->Arg(4)->Arg(46)->Arg(64);

// Requests through a two-device split of a depth-8 spine tree.
void BM_InferenceRequest(benchmark::State& state) {
  innet::DecisionTreeModel t;
  t.class_count = 2;
  const int depth = 8;
  for (int d = 0; d < depth; ++d) {
    t.nodes.push_back({2 * d, false, d % 4, 1000 * (d + 1), 2 * d + 1, 2 * d + 2, -1, 0});
    t.nodes.push_back({2 * d + 1, true, -1, 0, -1, -1, d % 2, 0});
  }
  t.nodes.push_back({2 * depth, true, -1, 0, -1, -1, 1, 0});
  innet::ModelSpec m;
  m.quant.feature_count = 4;
  m.quant.value_bits = 16;
  m.body = t;
  innet::validate_model(m);
  const auto program = innet::translate(m);

  innet::DeviceConfig cfg;
  cfg.stage_count = 5;
  const auto net = innet::line(2, cfg);
  innet::Network network(net);
  innet::deploy(network, program, innet::plan_program(program, net, {}), 1, 1);

  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint32_t> v(0, 65535);
  innet::Packet p;
  p.header.rid = 1;
  p.intermediates = innet::empty_intermediates(program.info.layout);
  for (auto _ : state) {
    state.PauseTiming();
    p.features = {v(rng), v(rng), v(rng), v(rng)};
    const innet::Frame f{innet::EtherType::kInference, 0, innet::encode(p, program.info.layout)};
    state.ResumeTiming();
    auto d = network.send(0, f);
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_InferenceRequest);

}  // namespace
