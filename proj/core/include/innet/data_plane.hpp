// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef INNET_DATA_PLANE_HPP_
#define INNET_DATA_PLANE_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "innet/packet.hpp"
#include "innet/table_program.hpp"

namespace innet {

// Per-device limits. Each stage hosts a tree block (dt_layer[0..1],
// dt_predict, multitree_voting) and an svm block (svm_mul[0..mul_slots-1],
// svm_predict). Capacities are per table instance.
struct DeviceConfig {
  bool programmable = true;
  int stage_count = 20;
  int mul_slots = 8;
  std::size_t tcam_capacity = 2048;
  std::size_t sram_capacity = 4096;

  std::size_t capacity(TableKind kind) const {
    return resource_of(kind) == ResourceClass::kTcam ? tcam_capacity : sram_capacity;
  }
  // Table slots of `kind` in one stage.
  int slots(TableKind kind) const;

  friend bool operator==(const DeviceConfig&, const DeviceConfig&) = default;
};

// Packet layouts per (mid, vid). Populated by the control plane before
// traffic flows; read-only afterwards.
class ModelRegistry {
 public:
  void add(const ProgramInfo& info);
  void remove(int mid, int vid);
  const ProgramInfo* find(int mid, int vid) const;

 private:
  std::map<std::pair<int, int>, ProgramInfo> models_;
};

enum class EtherType : std::uint16_t { kPlain = 0x0800, kInference = 0x88B5 };

// What travels on a link. Inference payloads are encoded packets; plain
// frames carry opaque bytes and route on `rid`.
struct Frame {
  EtherType type = EtherType::kInference;
  std::uint8_t rid = 0;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct Egress {
  enum class Kind { kDevice, kHost };
  Kind kind = Kind::kDevice;
  int id = 0;

  friend bool operator==(const Egress&, const Egress&) = default;
};

struct TableCount {
  int stage = 0;
  TableKind kind = TableKind::kDtLayer;
  int slot = 0;
  std::size_t entries = 0;
};

struct ResourceUsage {
  // Non-empty tables only.
  std::vector<TableCount> tables;
  std::size_t tcam = 0;
  std::size_t sram = 0;
  // Stages holding no entries at all.
  int free_stages = 0;

  std::size_t entries(int stage, TableKind kind, int slot) const;
};

class VirtualDevice {
 public:
  VirtualDevice(int id, DeviceConfig config, std::shared_ptr<const ModelRegistry> registry);
  ~VirtualDevice();
  VirtualDevice(VirtualDevice&&) noexcept;
  VirtualDevice& operator=(VirtualDevice&&) noexcept;

  int id() const { return id_; }
  const DeviceConfig& config() const { return config_; }

  // Installs a device bundle: stage indices are device stages. Entries are
  // tagged with the bundle's (mid, vid). All-or-nothing: on error nothing
  // changes.
  void install(const TableProgram& bundle);
  void flush_model(int mid, int vid);
  ResourceUsage query_resources() const;
  std::size_t model_entries(int mid, int vid) const;

  void set_route(int rid, Egress egress);
  void clear_routes();

  // Runs one frame through the pipeline and returns where it goes next.
  std::pair<Egress, Frame> process(const Frame& frame) const;

 private:
  struct State;

  int id_;
  DeviceConfig config_;
  std::shared_ptr<const ModelRegistry> registry_;
  std::unique_ptr<State> state_;
};

}  // namespace innet

#endif  // INNET_DATA_PLANE_HPP_
