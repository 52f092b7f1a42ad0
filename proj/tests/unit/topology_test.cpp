// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#include "innet/topology.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "innet/error.hpp"
#include "oracles.hpp"

namespace innet {
namespace {

int switches(const NetworkModel& net) { return net.programmable_count(); }

TEST(Generators, FatTree) {
  const auto net = fat_tree(4);
  EXPECT_EQ(net.devices.size(), 20u);
  EXPECT_EQ(switches(net), 20);
  EXPECT_EQ(net.hosts.size(), 16u);
  EXPECT_EQ(net.links.size(), 32u);
  EXPECT_TRUE(net.connected());
  // Edge switches see only their two aggregation switches; hosts are not devices.
  for (const auto& adj : net.adjacency()) EXPECT_TRUE(adj.size() == 2u || adj.size() == 4u);
  EXPECT_EQ(fat_tree(6).devices.size(), 45u);
  try {
    fat_tree(3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(Generators, DCellAndBCubeCounts) {
  // DCell_1 with n = 4: 5 cells of 4 servers, one switch per cell.
  const auto d = dcell(4, 1);
  EXPECT_EQ(d.devices.size(), 25u);
  EXPECT_EQ(switches(d), 5);
  EXPECT_EQ(d.hosts.size(), 20u);
  EXPECT_EQ(d.links.size(), 20u + 10u);
  EXPECT_TRUE(d.connected());
  // BCube_1 with n = 4: 16 servers, 2 levels of 4 switches.
  const auto b = bcube(4, 1);
  EXPECT_EQ(b.devices.size(), 24u);
  EXPECT_EQ(switches(b), 8);
  EXPECT_EQ(b.links.size(), 32u);
  EXPECT_TRUE(b.connected());
  for (const auto& dev : b.devices) {
    if (!dev.config.programmable) {
      EXPECT_EQ(dev.config.stage_count, 0);
    }
  }
}

TEST(Generators, JellyfishIsRegularAndSeeded) {
  const auto a = jellyfish(80, 3, 11);
  EXPECT_EQ(a.devices.size(), 80u);
  EXPECT_TRUE(a.connected());
  for (const auto& adj : a.adjacency()) EXPECT_EQ(adj.size(), 3u);
  EXPECT_EQ(jellyfish(80, 3, 11), a);
  EXPECT_NE(jellyfish(80, 3, 12).links, a.links);
  EXPECT_THROW(jellyfish(5, 3, 1), Error);  // n*d odd
}

TEST(Generators, LineAndDispatch) {
  const auto l = line(4);
  EXPECT_EQ(l.links.size(), 3u);
  ASSERT_EQ(l.hosts.size(), 2u);
  EXPECT_EQ(l.hosts[0].device, 0);
  EXPECT_EQ(l.hosts[1].device, 3);
  const auto one = line(1);
  EXPECT_EQ(one.hosts[0].device, 0);
  EXPECT_EQ(one.hosts[1].device, 0);
  EXPECT_EQ(generate(TopologyKind::kFatTree, 4, 99, 0), fat_tree(4));
  EXPECT_EQ(generate(TopologyKind::kBCube, 3, 1, 0), bcube(3, 1));
  for (auto k : {TopologyKind::kFatTree, TopologyKind::kDCell, TopologyKind::kBCube, TopologyKind::kJellyfish,
                 TopologyKind::kLine}) {
    EXPECT_EQ(topology_kind_from_string(to_string(k)), k);
  }
}

TEST(Paths, LineHasOnePath) {
  const auto paths = enumerate_paths(line(5), 0, 1);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0], (Path{0, 1, 2, 3, 4}));
  EXPECT_EQ(enumerate_device_paths(line(5), 2, 2), (std::vector<Path>{{2}}));
}

TEST(Paths, ParallelPairGivesTwoPaths) {
  // 0 - 1 - 3 and 0 - 2 - 3.
  NetworkModel net;
  for (int i = 0; i < 4; ++i) net.devices.push_back(DeviceSpec{i, "d" + std::to_string(i), {}});
  net.links = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  const auto paths = enumerate_device_paths(net, 0, 3);
  EXPECT_EQ(paths, (std::vector<Path>{{0, 1, 3}, {0, 2, 3}}));
  EXPECT_EQ(enumerate_device_paths(net, 0, 3, {1, 16}).size(), 1u);
  EXPECT_TRUE(enumerate_device_paths(net, 0, 3, {64, 2}).empty());
}

TEST(Paths, FatTreeMatchesDfsOracle) {
  const auto net = fat_tree(4);
  const int src = net.hosts.front().device;
  const int dst = net.hosts.back().device;
  const PathOptions opt{16, 7};
  const auto got = enumerate_device_paths(net, src, dst, opt);
  auto want = oracle::all_simple_paths(net, src, dst, opt.max_len);
  want.resize(std::min<std::size_t>(want.size(), 16));
  EXPECT_EQ(got, want);
  EXPECT_EQ(got.size(), 16u);
  // The shortest inter-pod paths go edge-agg-core-agg-edge: four of them.
  EXPECT_EQ(std::count_if(got.begin(), got.end(), [](const Path& p) { return p.size() == 5; }), 4);
}

TEST(Paths, RandomGraphsMatchDfsOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto net = jellyfish(12, 3, seed);
    const auto got = enumerate_device_paths(net, 0, 11, {1000, 6});
    EXPECT_EQ(got, oracle::all_simple_paths(net, 0, 11, 6)) << seed;
  }
}

TEST(Paths, DisconnectedThrows) {
  NetworkModel net;
  for (int i = 0; i < 3; ++i) net.devices.push_back(DeviceSpec{i, "d" + std::to_string(i), {}});
  net.links = {{0, 1}};
  try {
    enumerate_device_paths(net, 0, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDisconnected);
  }
}

TEST(TopologyFile, RoundTrip) {
  DeviceConfig cfg;
  cfg.stage_count = 7;
  cfg.tcam_capacity = 100;
  for (const auto& net : {fat_tree(4, cfg), dcell(2, 1, cfg), jellyfish(10, 3, 4, cfg), line(3, cfg)}) {
    EXPECT_EQ(parse_topology(serialize_topology(net)), net);
  }
}

TEST(TopologyFile, ValidationErrors) {
  NetworkModel net = line(3);
  net.links.emplace_back(0, 0);
  EXPECT_THROW(net.validate(), Error);
  net = line(3);
  net.links.emplace_back(1, 0);
  EXPECT_THROW(net.validate(), Error);
  net = line(3);
  net.hosts[0].device = 9;
  EXPECT_THROW(net.validate(), Error);
  EXPECT_THROW(parse_topology("{\"devices\": 3}"), Error);
}

}  // namespace
}  // namespace innet
