// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#include "innet/topology.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <set>

#include "innet/error.hpp"
#include "json_util.hpp"

namespace innet {

std::vector<std::vector<int>> NetworkModel::adjacency() const {
  std::vector<std::vector<int>> adj(devices.size());
  for (const auto& [a, b] : links) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& n : adj) std::sort(n.begin(), n.end());
  return adj;
}

bool NetworkModel::connected() const {
  if (devices.empty()) return true;
  const auto adj = adjacency();
  std::vector<char> seen(devices.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == devices.size();
}

int NetworkModel::programmable_count() const {
  return static_cast<int>(std::count_if(devices.begin(), devices.end(),
                                        [](const DeviceSpec& d) { return d.config.programmable; }));
}

void NetworkModel::validate() const {
  const int n = static_cast<int>(devices.size());
  for (int i = 0; i < n; ++i) {
    if (devices[static_cast<std::size_t>(i)].id != i) {
      throw Error(ErrorCode::kInvalidArgument, "device ids must be dense, index " + std::to_string(i));
    }
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& [a, b] : links) {
    if (a < 0 || b < 0 || a >= n || b >= n) {
      throw Error(ErrorCode::kInvalidArgument,
                  "link (" + std::to_string(a) + ", " + std::to_string(b) + ") names a missing device");
    }
    if (a == b) throw Error(ErrorCode::kInvalidArgument, "self loop on device " + std::to_string(a));
    if (!seen.insert(std::minmax(a, b)).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate link (" + std::to_string(a) + ", " + std::to_string(b) + ")");
    }
  }
  for (std::size_t h = 0; h < hosts.size(); ++h) {
    if (hosts[h].id != static_cast<int>(h)) {
      throw Error(ErrorCode::kInvalidArgument, "host ids must be dense, index " + std::to_string(h));
    }
    if (hosts[h].device < 0 || hosts[h].device >= n) {
      throw Error(ErrorCode::kInvalidArgument, "host " + std::to_string(h) + " attaches to a missing device");
    }
  }
}

std::string_view to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::kFatTree: return "fat_tree";
    case TopologyKind::kDCell: return "dcell";
    case TopologyKind::kBCube: return "bcube";
    case TopologyKind::kJellyfish: return "jellyfish";
    case TopologyKind::kLine: return "line";
  }
  return "?";
}

TopologyKind topology_kind_from_string(std::string_view name) {
  for (auto k : {TopologyKind::kFatTree, TopologyKind::kDCell, TopologyKind::kBCube,
                 TopologyKind::kJellyfish, TopologyKind::kLine}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown topology kind '" + std::string(name) + "'");
}

namespace {

int add_device(NetworkModel& net, std::string name, const DeviceConfig& config) {
  const int id = static_cast<int>(net.devices.size());
  net.devices.push_back(DeviceSpec{id, std::move(name), config});
  return id;
}

void add_host(NetworkModel& net, int device) {
  const int id = static_cast<int>(net.hosts.size());
  net.hosts.push_back(HostSpec{id, "h" + std::to_string(id), device});
}

long long ipow(long long base, int exp) {
  long long r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

DeviceConfig relay_config() {
  DeviceConfig c;
  c.programmable = false;
  c.stage_count = 0;
  return c;
}

// Uniform integer in [0, bound) by rejection, so the stream is identical on
// every standard library.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

void dcell_links(NetworkModel& net, const std::vector<long long>& t, int n, long long base, int level,
                 const DeviceConfig& device) {
  if (level == 0) {
    const int sw = add_device(net, "sw" + std::to_string(base / n), device);
    for (int i = 0; i < n; ++i) net.links.emplace_back(static_cast<int>(base + i), sw);
    return;
  }
  const long long sub = t[static_cast<std::size_t>(level - 1)];
  const long long g = sub + 1;
  for (long long i = 0; i < g; ++i) dcell_links(net, t, n, base + i * sub, level - 1, device);
  for (long long i = 0; i < g; ++i) {
    for (long long j = i + 1; j < g; ++j) {
      net.links.emplace_back(static_cast<int>(base + i * sub + (j - 1)),
                             static_cast<int>(base + j * sub + i));
    }
  }
}

}  // namespace

NetworkModel fat_tree(int k, const DeviceConfig& device) {
  if (k < 2 || k % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "fat_tree k must be even and >= 2, got " + std::to_string(k));
  }
  NetworkModel net;
  net.kind = "fat_tree";
  net.params = {{"k", k}};
  const int half = k / 2;
  for (int c = 0; c < half * half; ++c) add_device(net, "core" + std::to_string(c), device);
  for (int p = 0; p < k; ++p) {
    std::vector<int> agg;
    std::vector<int> edge;
    for (int a = 0; a < half; ++a) {
      agg.push_back(add_device(net, "agg" + std::to_string(p) + "_" + std::to_string(a), device));
    }
    for (int e = 0; e < half; ++e) {
      edge.push_back(add_device(net, "edge" + std::to_string(p) + "_" + std::to_string(e), device));
    }
    for (int a = 0; a < half; ++a) {
      for (int c = 0; c < half; ++c) net.links.emplace_back(a * half + c, agg[static_cast<std::size_t>(a)]);
      for (int e : edge) net.links.emplace_back(agg[static_cast<std::size_t>(a)], e);
    }
    for (int e : edge) {
      for (int h = 0; h < half; ++h) add_host(net, e);
    }
  }
  return net;
}

NetworkModel dcell(int n, int k, const DeviceConfig& device) {
  if (n < 2 || k < 0 || k > 3) {
    throw Error(ErrorCode::kInvalidArgument, "dcell needs n >= 2 and 0 <= k <= 3");
  }
  std::vector<long long> t{n};
  for (int l = 1; l <= k; ++l) t.push_back((t.back() + 1) * t.back());
  if (t.back() > 200000) throw Error(ErrorCode::kInvalidArgument, "dcell too large");
  NetworkModel net;
  net.kind = "dcell";
  net.params = {{"n", n}, {"k", k}};
  for (long long s = 0; s < t.back(); ++s) add_device(net, "srv" + std::to_string(s), relay_config());
  dcell_links(net, t, n, 0, k, device);
  for (long long s = 0; s < t.back(); ++s) add_host(net, static_cast<int>(s));
  return net;
}

NetworkModel bcube(int n, int k, const DeviceConfig& device) {
  if (n < 2 || k < 0 || ipow(n, k + 1) > 200000) {
    throw Error(ErrorCode::kInvalidArgument, "bcube needs n >= 2, k >= 0 and a bounded size");
  }
  NetworkModel net;
  net.kind = "bcube";
  net.params = {{"n", n}, {"k", k}};
  const long long servers = ipow(n, k + 1);
  const long long per_level = ipow(n, k);
  for (long long s = 0; s < servers; ++s) add_device(net, "srv" + std::to_string(s), relay_config());
  for (int l = 0; l <= k; ++l) {
    for (long long w = 0; w < per_level; ++w) {
      add_device(net, "sw" + std::to_string(l) + "_" + std::to_string(w), device);
    }
  }
  for (long long s = 0; s < servers; ++s) {
    for (int l = 0; l <= k; ++l) {
      const long long low = ipow(n, l);
      const long long w = (s / (low * n)) * low + s % low;
      net.links.emplace_back(static_cast<int>(s), static_cast<int>(servers + l * per_level + w));
    }
  }
  for (long long s = 0; s < servers; ++s) add_host(net, static_cast<int>(s));
  return net;
}

NetworkModel jellyfish(int n, int d, std::uint64_t seed, const DeviceConfig& device) {
  if (n < 2 || d < 1 || d >= n || (static_cast<long long>(n) * d) % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "jellyfish needs 1 <= d < n and n*d even, got n=" + std::to_string(n) +
                    " d=" + std::to_string(d));
  }
  if (d == 1 && n > 2) throw Error(ErrorCode::kInvalidArgument, "jellyfish with d=1 cannot be connected");
  std::mt19937_64 rng(seed);
  std::vector<int> stubs;
  for (int v = 0; v < n; ++v) {
    for (int i = 0; i < d; ++i) stubs.push_back(v);
  }
  for (int attempt = 0; attempt < 100000; ++attempt) {
    for (std::size_t i = stubs.size() - 1; i > 0; --i) {
      std::swap(stubs[i], stubs[uniform_below(rng, i + 1)]);
    }
    std::set<std::pair<int, int>> edges;
    bool simple = true;
    for (std::size_t i = 0; i < stubs.size() && simple; i += 2) {
      const auto e = std::minmax(stubs[i], stubs[i + 1]);
      simple = e.first != e.second && edges.insert(e).second;
    }
    if (!simple) continue;
    NetworkModel net;
    net.kind = "jellyfish";
    net.params = {{"n", n}, {"d", d}};
    net.seed = seed;
    for (int v = 0; v < n; ++v) add_device(net, "sw" + std::to_string(v), device);
    net.links.assign(edges.begin(), edges.end());
    if (!net.connected()) continue;
    for (int v = 0; v < n; ++v) add_host(net, v);
    return net;
  }
  throw Error(ErrorCode::kInvalidArgument, "jellyfish: no simple connected graph found");
}

NetworkModel line(int n, const DeviceConfig& device) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "line needs at least one device");
  NetworkModel net;
  net.kind = "line";
  net.params = {{"n", n}};
  for (int i = 0; i < n; ++i) add_device(net, "d" + std::to_string(i), device);
  for (int i = 0; i + 1 < n; ++i) net.links.emplace_back(i, i + 1);
  add_host(net, 0);
  add_host(net, n - 1);
  return net;
}

NetworkModel generate(TopologyKind kind, int a, int b, std::uint64_t seed, const DeviceConfig& device) {
  switch (kind) {
    case TopologyKind::kFatTree: return fat_tree(a, device);
    case TopologyKind::kDCell: return dcell(a, b, device);
    case TopologyKind::kBCube: return bcube(a, b, device);
    case TopologyKind::kJellyfish: return jellyfish(a, b, seed, device);
    case TopologyKind::kLine: return line(a, device);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown topology kind");
}

// ---------------------------------------------------------------------------
// Path enumeration (Yen's k shortest simple paths)

namespace {

struct PathOrder {
  bool operator()(const Path& a, const Path& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

// Lexicographically smallest shortest path from s to t avoiding `blocked`
// nodes and the first hops in `banned_first`. Empty when none exists.
Path lexmin_shortest(const std::vector<std::vector<int>>& adj, int s, int t,
                     const std::vector<char>& blocked, const std::set<int>& banned_first) {
  if (s == t) return {s};
  const std::size_t n = adj.size();
  std::vector<int> dist(n, -1);
  std::deque<int> queue{t};
  dist[static_cast<std::size_t>(t)] = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (v == s || blocked[static_cast<std::size_t>(v)] || dist[static_cast<std::size_t>(v)] >= 0) continue;
      dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
      queue.push_back(v);
    }
  }
  int first = -1;
  for (int v : adj[static_cast<std::size_t>(s)]) {
    if (banned_first.count(v) || dist[static_cast<std::size_t>(v)] < 0) continue;
    if (first < 0 || dist[static_cast<std::size_t>(v)] < dist[static_cast<std::size_t>(first)]) first = v;
  }
  if (first < 0) return {};
  Path path{s, first};
  int u = first;
  while (u != t) {
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (v != s && dist[static_cast<std::size_t>(v)] == dist[static_cast<std::size_t>(u)] - 1) {
        u = v;
        break;
      }
    }
    path.push_back(u);
  }
  return path;
}

}  // namespace

std::vector<Path> enumerate_device_paths(const NetworkModel& net, int src, int dst,
                                         const PathOptions& options) {
  const int n = static_cast<int>(net.devices.size());
  if (src < 0 || dst < 0 || src >= n || dst >= n) {
    throw Error(ErrorCode::kInvalidArgument, "path endpoints out of range");
  }
  if (options.limit < 1 || options.max_len < 1) {
    throw Error(ErrorCode::kInvalidArgument, "path limit and max_len must be positive");
  }
  const auto adj = net.adjacency();
  std::vector<char> blocked(adj.size(), 0);
  Path first = lexmin_shortest(adj, src, dst, blocked, {});
  if (first.empty()) {
    throw Error(ErrorCode::kDisconnected,
                "device " + std::to_string(src) + " cannot reach device " + std::to_string(dst));
  }
  std::vector<Path> found;
  if (static_cast<int>(first.size()) > options.max_len) return found;
  found.push_back(std::move(first));
  std::set<Path, PathOrder> candidates;
  while (static_cast<int>(found.size()) < options.limit) {
    const Path& last = found.back();
    for (std::size_t i = 0; i + 1 < last.size(); ++i) {
      const int spur = last[i];
      std::set<int> banned;
      for (const auto& p : found) {
        if (p.size() > i + 1 && std::equal(last.begin(), last.begin() + static_cast<long>(i) + 1, p.begin())) {
          banned.insert(p[i + 1]);
        }
      }
      std::fill(blocked.begin(), blocked.end(), 0);
      for (std::size_t r = 0; r < i; ++r) blocked[static_cast<std::size_t>(last[r])] = 1;
      Path spur_path = lexmin_shortest(adj, spur, dst, blocked, banned);
      if (spur_path.empty()) continue;
      Path total(last.begin(), last.begin() + static_cast<long>(i));
      total.insert(total.end(), spur_path.begin(), spur_path.end());
      if (static_cast<int>(total.size()) <= options.max_len) candidates.insert(std::move(total));
    }
    if (candidates.empty()) break;
    found.push_back(*candidates.begin());
    candidates.erase(candidates.begin());
  }
  return found;
}

std::vector<Path> enumerate_paths(const NetworkModel& net, int src_host, int dst_host,
                                  const PathOptions& options) {
  const int h = static_cast<int>(net.hosts.size());
  if (src_host < 0 || dst_host < 0 || src_host >= h || dst_host >= h) {
    throw Error(ErrorCode::kInvalidArgument, "host id out of range");
  }
  return enumerate_device_paths(net, net.hosts[static_cast<std::size_t>(src_host)].device,
                                net.hosts[static_cast<std::size_t>(dst_host)].device, options);
}

// ---------------------------------------------------------------------------
// Topology file

using nlohmann::json;

std::string serialize_topology(const NetworkModel& net) {
  json j;
  j["format_version"] = 1;
  j["kind"] = net.kind;
  j["params"] = net.params;
  j["seed"] = net.seed;
  json devices = json::array();
  for (const auto& d : net.devices) {
    devices.push_back({{"id", d.id},
                       {"name", d.name},
                       {"programmable", d.config.programmable},
                       {"stage_count", d.config.stage_count},
                       {"mul_slots", d.config.mul_slots},
                       {"tcam_capacity", d.config.tcam_capacity},
                       {"sram_capacity", d.config.sram_capacity}});
  }
  j["devices"] = std::move(devices);
  json links = json::array();
  for (const auto& [a, b] : net.links) links.push_back({a, b});
  j["links"] = std::move(links);
  json hosts = json::array();
  for (const auto& h : net.hosts) hosts.push_back({{"id", h.id}, {"name", h.name}, {"device", h.device}});
  j["hosts"] = std::move(hosts);
  return j.dump(1) + "\n";
}

NetworkModel parse_topology(std::string_view text) {
  NetworkModel net;
  try {
    const json j = json::parse(text);
    if (j.at("format_version").get<int>() != 1) {
      throw Error(ErrorCode::kParse, "unsupported topology format_version");
    }
    net.kind = j.value("kind", std::string("custom"));
    if (j.contains("params")) net.params = j.at("params").get<std::map<std::string, int>>();
    net.seed = j.value("seed", std::uint64_t{0});
    const DeviceConfig defaults;
    for (const auto& d : j.at("devices")) {
      DeviceSpec spec;
      spec.id = d.at("id").get<int>();
      spec.name = d.value("name", "d" + std::to_string(spec.id));
      spec.config.programmable = d.value("programmable", defaults.programmable);
      spec.config.stage_count =
          d.value("stage_count", spec.config.programmable ? defaults.stage_count : 0);
      spec.config.mul_slots = d.value("mul_slots", defaults.mul_slots);
      spec.config.tcam_capacity = d.value("tcam_capacity", defaults.tcam_capacity);
      spec.config.sram_capacity = d.value("sram_capacity", defaults.sram_capacity);
      net.devices.push_back(std::move(spec));
    }
    for (const auto& l : j.at("links")) net.links.emplace_back(l.at(0).get<int>(), l.at(1).get<int>());
    for (const auto& h : j.value("hosts", json::array())) {
      HostSpec spec;
      spec.id = h.at("id").get<int>();
      spec.name = h.value("name", "h" + std::to_string(spec.id));
      spec.device = h.at("device").get<int>();
      net.hosts.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("topology file: ") + e.what());
  }
  net.validate();
  return net;
}

NetworkModel load_topology(const std::filesystem::path& path) {
  return parse_topology(detail::read_file(path));
}

void save_topology(const NetworkModel& net, const std::filesystem::path& path) {
  detail::write_file(path, serialize_topology(net));
}

}  // namespace innet
