// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef INNET_TOPOLOGY_HPP_
#define INNET_TOPOLOGY_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "innet/data_plane.hpp"

namespace innet {

struct DeviceSpec {
  int id = 0;
  std::string name;
  DeviceConfig config;

  friend bool operator==(const DeviceSpec&, const DeviceSpec&) = default;
};

struct HostSpec {
  int id = 0;
  std::string name;
  int device = 0;

  friend bool operator==(const HostSpec&, const HostSpec&) = default;
};

// Undirected device graph with hosts hanging off devices. Ids are dense
// indices into `devices` / `hosts`.
struct NetworkModel {
  std::string kind = "custom";
  std::map<std::string, int> params;
  std::uint64_t seed = 0;
  std::vector<DeviceSpec> devices;
  std::vector<std::pair<int, int>> links;
  std::vector<HostSpec> hosts;

  // Sorted neighbour lists.
  std::vector<std::vector<int>> adjacency() const;
  bool connected() const;
  int programmable_count() const;
  // Throws kInvalidArgument on dangling ids, self loops or duplicate links.
  void validate() const;

  friend bool operator==(const NetworkModel&, const NetworkModel&) = default;
};

enum class TopologyKind { kFatTree, kDCell, kBCube, kJellyfish, kLine };

std::string_view to_string(TopologyKind kind);
TopologyKind topology_kind_from_string(std::string_view name);

// Switches use `device`; DCell/BCube servers are non-programmable relays.
//   fat_tree(k)        k even, (k/2)^2 core + k pods of k/2 agg and k/2 edge, k/2 hosts per edge
//   dcell(n, k)        n >= 2, recursive construction, one host per server
//   bcube(n, k)        n >= 2, n^(k+1) servers and (k+1) n^k switches
//   jellyfish(n, d)    seeded random d-regular graph, one host per switch
//   line(n)            n devices in a row, a host at each end
NetworkModel fat_tree(int k, const DeviceConfig& device = {});
NetworkModel dcell(int n, int k, const DeviceConfig& device = {});
NetworkModel bcube(int n, int k, const DeviceConfig& device = {});
NetworkModel jellyfish(int n, int d, std::uint64_t seed, const DeviceConfig& device = {});
NetworkModel line(int n, const DeviceConfig& device = {});

// Dispatches on kind; `a`/`b` are the kind's two parameters (b ignored for
// fat_tree and line).
NetworkModel generate(TopologyKind kind, int a, int b, std::uint64_t seed,
                      const DeviceConfig& device = {});

using Path = std::vector<int>;

struct PathOptions {
  int limit = 64;
  // Maximum devices on a path.
  int max_len = 16;
};

// Up to `limit` simple device paths from src to dst, ordered by length then
// lexicographically by device id. src == dst yields the single path [src].
// Throws kDisconnected when no path exists at all.
std::vector<Path> enumerate_device_paths(const NetworkModel& net, int src, int dst,
                                         const PathOptions& options = {});
// Same, between the devices hosts attach to.
std::vector<Path> enumerate_paths(const NetworkModel& net, int src_host, int dst_host,
                                  const PathOptions& options = {});

std::string serialize_topology(const NetworkModel& net);
NetworkModel parse_topology(std::string_view text);
NetworkModel load_topology(const std::filesystem::path& path);
void save_topology(const NetworkModel& net, const std::filesystem::path& path);

}  // namespace innet

#endif  // INNET_TOPOLOGY_HPP_
