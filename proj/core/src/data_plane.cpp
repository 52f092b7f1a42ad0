// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#include "innet/data_plane.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "innet/error.hpp"
#include "innet/model_ir.hpp"
#include "innet/ternary.hpp"

namespace innet {

int DeviceConfig::slots(TableKind kind) const {
  switch (kind) {
    case TableKind::kDtLayer: return 2;
    case TableKind::kSvmMul: return mul_slots;
    default: return 1;
  }
}

void ModelRegistry::add(const ProgramInfo& info) { models_[{info.mid, info.vid}] = info; }

void ModelRegistry::remove(int mid, int vid) { models_.erase({mid, vid}); }

const ProgramInfo* ModelRegistry::find(int mid, int vid) const {
  auto it = models_.find({mid, vid});
  return it == models_.end() ? nullptr : &it->second;
}

std::size_t ResourceUsage::entries(int stage, TableKind kind, int slot) const {
  for (const auto& t : tables) {
    if (t.stage == stage && t.kind == kind && t.slot == slot) return t.entries;
  }
  return 0;
}

namespace {

using ModelKey = std::pair<int, int>;
using TableId = std::pair<TableKind, int>;

struct VectorHash {
  std::size_t operator()(const std::vector<std::uint64_t>& v) const noexcept {
    std::size_t h = 0xcbf29ce484222325ull;
    for (auto x : v) h = (h ^ std::hash<std::uint64_t>{}(x)) * 0x100000001b3ull;
    return h;
  }
};

std::string table_name(int device, int stage, TableKind kind, int slot) {
  return "device " + std::to_string(device) + " stage " + std::to_string(stage) + " table " +
         std::string(to_string(kind)) + "[" + std::to_string(slot) + "]";
}

// Entries of one model in one table, with a hash index over the key fields
// that are exact in every entry.
struct ModelTable {
  std::vector<TableEntry> entries;
  std::vector<FieldRef> schema;
  std::vector<std::size_t> exact_fields;
  std::unordered_map<std::vector<std::uint64_t>, std::vector<std::uint32_t>, VectorHash> index;

  void rebuild() {
    exact_fields.clear();
    index.clear();
    for (std::size_t k = 0; k < schema.size(); ++k) {
      const bool all_exact = std::all_of(entries.begin(), entries.end(),
                                         [k](const TableEntry& e) { return e.keys[k].key.is_exact(); });
      if (all_exact) exact_fields.push_back(k);
    }
    for (std::uint32_t i = 0; i < entries.size(); ++i) {
      std::vector<std::uint64_t> key;
      key.reserve(exact_fields.size());
      for (auto k : exact_fields) key.push_back(entries[i].keys[k].key.low());
      index[std::move(key)].push_back(i);
    }
  }
};

struct Table {
  std::map<ModelKey, ModelTable> models;

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [_, m] : models) n += m.entries.size();
    return n;
  }
};

struct ModelState {
  std::optional<InitAction> init;
  std::optional<int> final_stage;
};

// Live per-packet registers.
struct Context {
  std::vector<FeatureValue> features;
  std::uint64_t code[2] = {0, 0};
  std::uint32_t freg[2] = {0, 0};
  std::vector<std::uint8_t> slots;
  std::vector<std::int64_t> acc;
  std::optional<ClassId> result;
};

bool field_allowed(TableKind kind, FieldRef::Kind f) {
  switch (kind) {
    case TableKind::kDtLayer: return f == FieldRef::Kind::kCode || f == FieldRef::Kind::kFeatureReg;
    case TableKind::kDtPredict: return f == FieldRef::Kind::kCode;
    case TableKind::kMultitreeVoting: return f == FieldRef::Kind::kSlot;
    case TableKind::kSvmMul: return f == FieldRef::Kind::kFeature;
    case TableKind::kSvmPredict: return f == FieldRef::Kind::kSvmCode;
  }
  return false;
}

bool action_allowed(TableKind kind, const Action& a) {
  if (std::holds_alternative<NoOp>(a)) return true;
  switch (kind) {
    case TableKind::kDtLayer: return std::holds_alternative<WriteCode>(a);
    case TableKind::kDtPredict: return std::holds_alternative<SetDtResult>(a);
    case TableKind::kMultitreeVoting: return std::holds_alternative<SetVote>(a);
    case TableKind::kSvmMul: return std::holds_alternative<AddProduct>(a);
    case TableKind::kSvmPredict: return std::holds_alternative<SetSvmResult>(a);
  }
  return false;
}

std::uint64_t read_field(const Context& ctx, const FieldRef& f) {
  switch (f.kind) {
    case FieldRef::Kind::kCode: return ctx.code[f.index];
    case FieldRef::Kind::kFeatureReg: return ctx.freg[f.index];
    case FieldRef::Kind::kFeature:
      return ctx.features.at(static_cast<std::size_t>(f.index)) >> f.shift;
    case FieldRef::Kind::kSlot: return ctx.slots.at(static_cast<std::size_t>(f.index));
    case FieldRef::Kind::kSvmCode: return svm_sign_bits(ctx.acc);
  }
  return 0;
}

void load_feature(Context& ctx, const LoadFeature& load) {
  ctx.freg[load.reg] = ctx.features.at(static_cast<std::size_t>(load.feature));
}

void apply_tree_init(Context& ctx, const TreeInit& init) {
  ctx.code[0] = 1;
  ctx.code[1] = 0;
  if (init.root) load_feature(ctx, *init.root);
}

void apply(Context& ctx, const Action& action, int acc_bits) {
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, WriteCode>) {
          ctx.code[a.reg] = a.value;
          if (a.load) load_feature(ctx, *a.load);
        } else if constexpr (std::is_same_v<T, SetDtResult>) {
          ctx.slots.at(static_cast<std::size_t>(a.slot)) = static_cast<std::uint8_t>(a.cls);
          ctx.result = a.cls;
          if (a.reinit) apply_tree_init(ctx, *a.reinit);
        } else if constexpr (std::is_same_v<T, SetVote> || std::is_same_v<T, SetSvmResult>) {
          ctx.result = a.cls;
        } else if constexpr (std::is_same_v<T, AddProduct>) {
          auto& acc = ctx.acc.at(static_cast<std::size_t>(a.hyperplane));
          acc = wrap_signed(acc + a.product, acc_bits);
        }
      },
      action);
}

}  // namespace

struct VirtualDevice::State {
  std::vector<std::map<TableId, Table>> stages;
  std::map<ModelKey, ModelState> models;
  std::map<int, Egress> routes;

  const TableEntry* lookup(const ModelTable& mt, const Context& ctx, const std::string& where) const {
    std::vector<std::uint64_t> key;
    key.reserve(mt.exact_fields.size());
    for (auto k : mt.exact_fields) key.push_back(read_field(ctx, mt.schema[k]));
    auto it = mt.index.find(key);
    if (it == mt.index.end()) return nullptr;
    const TableEntry* best = nullptr;
    bool tie = false;
    for (auto i : it->second) {
      const TableEntry& e = mt.entries[i];
      bool hit = true;
      for (std::size_t k = 0; k < e.keys.size() && hit; ++k) {
        hit = e.keys[k].key.matches(read_field(ctx, mt.schema[k]));
      }
      if (!hit) continue;
      if (best == nullptr || e.priority > best->priority) {
        best = &e;
        tie = false;
      } else if (e.priority == best->priority) {
        tie = true;
      }
    }
    if (tie) throw Error(ErrorCode::kInvariant, "ambiguous match in " + where);
    return best;
  }
};

VirtualDevice::VirtualDevice(int id, DeviceConfig config, std::shared_ptr<const ModelRegistry> registry)
    : id_(id), config_(config), registry_(std::move(registry)), state_(std::make_unique<State>()) {
  if (config_.stage_count < 0 || config_.mul_slots < 1) {
    throw Error(ErrorCode::kInvalidArgument, "invalid device config for device " + std::to_string(id));
  }
  if (config_.programmable) state_->stages.resize(static_cast<std::size_t>(config_.stage_count));
}

VirtualDevice::~VirtualDevice() = default;
VirtualDevice::VirtualDevice(VirtualDevice&&) noexcept = default;
VirtualDevice& VirtualDevice::operator=(VirtualDevice&&) noexcept = default;

void VirtualDevice::install(const TableProgram& bundle) {
  const ModelKey model{bundle.info.mid, bundle.info.vid};
  if (!config_.programmable) {
    if (bundle.entry_count() == 0 && !bundle.init && !bundle.final_stage) return;
    throw Error(ErrorCode::kUnsupported,
                "device " + std::to_string(id_) + " is not programmable");
  }

  // Validate everything before touching state.
  std::map<std::pair<int, TableId>, std::size_t> pending;
  for (const auto& s : bundle.stages) {
    if (s.index < 0 || s.index >= config_.stage_count) {
      throw Error(ErrorCode::kUnknownTable, "device " + std::to_string(id_) + " has no stage " +
                                                std::to_string(s.index));
    }
    for (const auto& t : s.tables) {
      const std::string where = table_name(id_, s.index, t.kind, t.slot);
      if (t.slot < 0 || t.slot >= config_.slots(t.kind)) {
        throw Error(ErrorCode::kUnknownTable, "no slot for " + where);
      }
      const TableId tid{t.kind, t.slot};
      const auto& stage = state_->stages[static_cast<std::size_t>(s.index)];
      const auto table_it = stage.find(tid);
      std::size_t existing = 0;
      std::vector<FieldRef> schema;
      if (table_it != stage.end()) {
        existing = table_it->second.size();
        if (auto it = table_it->second.models.find(model); it != table_it->second.models.end()) {
          schema = it->second.schema;
        }
      }
      if (schema.empty() && !t.entries.empty()) {
        for (const auto& k : t.entries.front().keys) schema.push_back(k.field);
      }
      for (const auto& e : t.entries) {
        std::vector<FieldRef> fields;
        for (const auto& k : e.keys) {
          if (!field_allowed(t.kind, k.field.kind)) {
            throw Error(ErrorCode::kInvalidArgument,
                        "field " + k.field.to_string() + " not allowed in " + where);
          }
          if (t.kind != TableKind::kDtLayer && !k.key.is_exact()) {
            throw Error(ErrorCode::kInvalidArgument, "ternary key in exact table " + where);
          }
          fields.push_back(k.field);
        }
        if (fields != schema) {
          throw Error(ErrorCode::kInvalidArgument, "inconsistent key fields in " + where);
        }
        if (!action_allowed(t.kind, e.action)) {
          throw Error(ErrorCode::kInvalidArgument, "action not allowed in " + where);
        }
      }
      pending[{s.index, tid}] += t.entries.size();
      const std::size_t total = existing + pending[{s.index, tid}];
      if (total > config_.capacity(t.kind)) {
        throw Error(ErrorCode::kCapacityExceeded,
                    where + " would hold " + std::to_string(total) + " entries, capacity " +
                        std::to_string(config_.capacity(t.kind)));
      }
    }
  }

  for (const auto& s : bundle.stages) {
    for (const auto& t : s.tables) {
      if (t.entries.empty()) continue;
      auto& mt = state_->stages[static_cast<std::size_t>(s.index)][{t.kind, t.slot}].models[model];
      if (mt.entries.empty()) {
        for (const auto& k : t.entries.front().keys) mt.schema.push_back(k.field);
      }
      mt.entries.insert(mt.entries.end(), t.entries.begin(), t.entries.end());
      mt.rebuild();
    }
  }
  auto& ms = state_->models[model];
  if (bundle.init) ms.init = bundle.init;
  if (bundle.final_stage) ms.final_stage = bundle.final_stage;
}

void VirtualDevice::flush_model(int mid, int vid) {
  const ModelKey model{mid, vid};
  for (auto& stage : state_->stages) {
    for (auto it = stage.begin(); it != stage.end();) {
      it->second.models.erase(model);
      it = it->second.models.empty() ? stage.erase(it) : std::next(it);
    }
  }
  state_->models.erase(model);
}

ResourceUsage VirtualDevice::query_resources() const {
  ResourceUsage u;
  for (std::size_t s = 0; s < state_->stages.size(); ++s) {
    bool used = false;
    for (const auto& [tid, table] : state_->stages[s]) {
      const std::size_t n = table.size();
      if (n == 0) continue;
      used = true;
      u.tables.push_back(TableCount{static_cast<int>(s), tid.first, tid.second, n});
      (resource_of(tid.first) == ResourceClass::kTcam ? u.tcam : u.sram) += n;
    }
    if (!used) ++u.free_stages;
  }
  return u;
}

std::size_t VirtualDevice::model_entries(int mid, int vid) const {
  std::size_t n = 0;
  for (const auto& stage : state_->stages) {
    for (const auto& [_, table] : stage) {
      if (auto it = table.models.find({mid, vid}); it != table.models.end()) n += it->second.entries.size();
    }
  }
  return n;
}

void VirtualDevice::set_route(int rid, Egress egress) { state_->routes[rid] = egress; }

void VirtualDevice::clear_routes() { state_->routes.clear(); }

std::pair<Egress, Frame> VirtualDevice::process(const Frame& frame) const {
  auto route = [&](int rid) {
    auto it = state_->routes.find(rid);
    if (it == state_->routes.end()) {
      throw Error(ErrorCode::kUnknownRoute,
                  "device " + std::to_string(id_) + " has no route for rid " + std::to_string(rid));
    }
    return it->second;
  };

  if (frame.type == EtherType::kPlain) return {route(frame.rid), frame};

  const Header header = decode_header(frame.payload);
  const ModelKey model{header.mid, header.vid};
  auto ms = state_->models.find(model);
  const bool hosts_model =
      config_.programmable && header.type == PacketType::kRequest &&
      (ms != state_->models.end() || model_entries(header.mid, header.vid) > 0);
  if (!hosts_model) return {route(header.rid), frame};

  const ProgramInfo* info = registry_ ? registry_->find(header.mid, header.vid) : nullptr;
  if (info == nullptr) {
    throw Error(ErrorCode::kMalformedPacket, "no layout registered for mid " +
                                                 std::to_string(header.mid) + " vid " +
                                                 std::to_string(header.vid));
  }
  const PacketLayout& layout = info->layout;
  Packet packet = decode(frame.payload, layout);

  Context ctx;
  ctx.features = packet.features;
  if (auto* t = std::get_if<TreeIntermediates>(&packet.intermediates)) {
    ctx.code[0] = t->code0;
    ctx.code[1] = t->code1;
    ctx.freg[0] = t->f0;
    ctx.freg[1] = t->f1;
    ctx.slots = t->slots;
  } else if (auto* s = std::get_if<SvmIntermediates>(&packet.intermediates)) {
    ctx.acc = s->accumulators;
  }

  const ModelState* state = ms == state_->models.end() ? nullptr : &ms->second;
  if (state != nullptr && state->init) {
    if (state->init->tree) apply_tree_init(ctx, *state->init->tree);
    if (!state->init->accumulators.empty()) {
      if (state->init->accumulators.size() != ctx.acc.size()) {
        throw Error(ErrorCode::kInvariant, "init accumulator count does not match layout");
      }
      ctx.acc = state->init->accumulators;
    }
  }

  const int last = state != nullptr && state->final_stage ? *state->final_stage
                                                          : static_cast<int>(state_->stages.size()) - 1;
  std::vector<const TableEntry*> winners;
  for (int s = 0; s <= last && s < static_cast<int>(state_->stages.size()); ++s) {
    winners.clear();
    int dt_layer_hits = 0;
    // Every table reads the registers as they were at stage entry.
    for (const auto& [tid, table] : state_->stages[static_cast<std::size_t>(s)]) {
      auto it = table.models.find(model);
      if (it == table.models.end() || it->second.entries.empty()) continue;
      const TableEntry* hit =
          state_->lookup(it->second, ctx, table_name(id_, s, tid.first, tid.second));
      if (hit == nullptr) continue;
      if (tid.first == TableKind::kDtLayer) ++dt_layer_hits;
      winners.push_back(hit);
    }
    if (dt_layer_hits > 1) {
      throw Error(ErrorCode::kInvariant, "more than one dt_layer entry fired on device " +
                                             std::to_string(id_) + " stage " + std::to_string(s));
    }
    for (const auto* e : winners) apply(ctx, e->action, layout.acc_bits);
  }

  Frame out = frame;
  if (state != nullptr && state->final_stage) {
    if (!ctx.result) {
      throw Error(ErrorCode::kInvariant, "final stage on device " + std::to_string(id_) +
                                             " produced no result");
    }
    Packet response;
    response.header = packet.header;
    response.header.type = PacketType::kResponse;
    response.header.rslt = static_cast<std::uint8_t>(*ctx.result);
    out.payload = encode(response, layout);
  } else {
    if (auto* t = std::get_if<TreeIntermediates>(&packet.intermediates)) {
      t->code0 = ctx.code[0];
      t->code1 = ctx.code[1];
      t->f0 = ctx.freg[0];
      t->f1 = ctx.freg[1];
      t->slots = ctx.slots;
    } else if (auto* sv = std::get_if<SvmIntermediates>(&packet.intermediates)) {
      sv->accumulators = ctx.acc;
    }
    out.payload = encode(packet, layout);
  }
  return {route(header.rid), out};
}

}  // namespace innet
