// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#include "innet/network.hpp"

#include <algorithm>
#include <string>

#include "innet/error.hpp"

namespace innet {

Network::Network(const NetworkModel& model)
    : model_(model), registry_(std::make_shared<ModelRegistry>()) {
  model_.validate();
  devices_.reserve(model_.devices.size());
  for (const auto& d : model_.devices) devices_.emplace_back(d.id, d.config, registry_);
  for (const auto& [a, b] : model_.links) links_.insert(std::minmax(a, b));
}

void Network::install_route(int rid, const Path& path, int dst_host) {
  if (path.empty()) throw Error(ErrorCode::kInvalidArgument, "empty route path");
  if (dst_host < 0 || dst_host >= static_cast<int>(model_.hosts.size()) ||
      model_.hosts[static_cast<std::size_t>(dst_host)].device != path.back()) {
    throw Error(ErrorCode::kInvalidArgument,
                "host " + std::to_string(dst_host) + " does not attach to the end of the route");
  }
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!links_.count(std::minmax(path[i], path[i + 1]))) {
      throw Error(ErrorCode::kInvalidArgument, "route uses missing link " + std::to_string(path[i]) + "-" +
                                                   std::to_string(path[i + 1]));
    }
    device(path[i]).set_route(rid, Egress{Egress::Kind::kDevice, path[i + 1]});
  }
  device(path.back()).set_route(rid, Egress{Egress::Kind::kHost, dst_host});
}

Delivery Network::send(int src_host, const Frame& frame, int max_hops) const {
  if (src_host < 0 || src_host >= static_cast<int>(model_.hosts.size())) {
    throw Error(ErrorCode::kInvalidArgument, "unknown source host " + std::to_string(src_host));
  }
  Delivery d;
  d.frame = frame;
  int at = model_.hosts[static_cast<std::size_t>(src_host)].device;
  d.wire_bytes += frame.payload.size();
  for (int hop = 0; hop < max_hops; ++hop) {
    d.devices.push_back(at);
    auto [egress, out] = device(at).process(d.frame);
    d.frame = std::move(out);
    d.wire_bytes += d.frame.payload.size();
    if (egress.kind == Egress::Kind::kHost) {
      if (egress.id < 0 || egress.id >= static_cast<int>(model_.hosts.size()) ||
          model_.hosts[static_cast<std::size_t>(egress.id)].device != at) {
        throw Error(ErrorCode::kUnknownRoute, "device " + std::to_string(at) + " routes to a host it does not serve");
      }
      d.host = egress.id;
      return d;
    }
    if (!links_.count(std::minmax(at, egress.id))) {
      throw Error(ErrorCode::kUnknownRoute,
                  "device " + std::to_string(at) + " routes to non-neighbour " + std::to_string(egress.id));
    }
    at = egress.id;
  }
  throw Error(ErrorCode::kUnknownRoute, "frame exceeded " + std::to_string(max_hops) + " hops");
}

}  // namespace innet
