// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef INNET_NETWORK_HPP_
#define INNET_NETWORK_HPP_

#include <cstddef>
#include <memory>
#include <set>
#include <utility>
#include <vector>

#include "innet/data_plane.hpp"
#include "innet/topology.hpp"

namespace innet {

struct Delivery {
  Frame frame;
  int host = -1;
  // Devices the frame passed through, in order.
  std::vector<int> devices;
  // Bytes put on the wire summed over every link traversed.
  std::size_t wire_bytes = 0;
};

// A set of virtual devices wired up per a NetworkModel. Frames move hop by
// hop; each hop runs the device pipeline to completion before the next.
class Network {
 public:
  explicit Network(const NetworkModel& model);

  const NetworkModel& model() const { return model_; }
  VirtualDevice& device(int id) { return devices_.at(static_cast<std::size_t>(id)); }
  const VirtualDevice& device(int id) const { return devices_.at(static_cast<std::size_t>(id)); }
  ModelRegistry& registry() { return *registry_; }

  // Routes `rid` along `path`, ending at `dst_host`, which must attach to the
  // last device of the path.
  void install_route(int rid, const Path& path, int dst_host);

  // Injects a frame at `src_host`'s device and follows it to a host.
  Delivery send(int src_host, const Frame& frame, int max_hops = 64) const;

 private:
  NetworkModel model_;
  std::shared_ptr<ModelRegistry> registry_;
  std::vector<VirtualDevice> devices_;
  std::set<std::pair<int, int>> links_;
};

}  // namespace innet

#endif  // INNET_NETWORK_HPP_
