// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef INNET_TABLE_PROGRAM_HPP_
#define INNET_TABLE_PROGRAM_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "innet/model_ir.hpp"
#include "innet/packet.hpp"
#include "innet/ternary.hpp"

namespace innet {

// The five predefined runtime-programmable table types.
enum class TableKind { kDtLayer, kDtPredict, kMultitreeVoting, kSvmMul, kSvmPredict };
enum class ResourceClass { kTcam, kSram };

std::string_view to_string(TableKind kind);
std::string_view to_string(ResourceClass rc);
TableKind table_kind_from_string(std::string_view name);
ResourceClass resource_of(TableKind kind);

// A packet/metadata field a key can read.
//   code<r>              status-code register r (0 or 1)
//   f<r>                 feature register r (0 or 1)
//   feature[i]           raw feature i; "feature[i]>>s" keys on its top bits
//   slot[t]              per-tree result slot t
//   svm_code             sign bits of all hyperplane accumulators
struct FieldRef {
  enum class Kind { kCode, kFeatureReg, kFeature, kSlot, kSvmCode };
  Kind kind = Kind::kCode;
  int index = 0;
  int shift = 0;

  std::string to_string() const;
  static FieldRef parse(std::string_view text);

  friend bool operator==(const FieldRef&, const FieldRef&) = default;
};

struct MatchKey {
  FieldRef field;
  TernaryKey key;

  friend bool operator==(const MatchKey&, const MatchKey&) = default;
};

struct LoadFeature {
  int reg = 0;
  int feature = 0;

  friend bool operator==(const LoadFeature&, const LoadFeature&) = default;
};

// Resets code0 := 1, code1 := 0 and optionally loads a root feature.
struct TreeInit {
  std::optional<LoadFeature> root;

  friend bool operator==(const TreeInit&, const TreeInit&) = default;
};

struct NoOp {
  friend bool operator==(const NoOp&, const NoOp&) = default;
};

struct WriteCode {
  int reg = 0;
  std::uint64_t value = 0;
  std::optional<LoadFeature> load;

  friend bool operator==(const WriteCode&, const WriteCode&) = default;
};

struct SetDtResult {
  int slot = 0;
  ClassId cls = 0;
  // Present when another tree follows in the same program.
  std::optional<TreeInit> reinit;

  friend bool operator==(const SetDtResult&, const SetDtResult&) = default;
};

struct SetVote {
  ClassId cls = 0;
  friend bool operator==(const SetVote&, const SetVote&) = default;
};

struct AddProduct {
  int hyperplane = 0;
  std::int64_t product = 0;
  friend bool operator==(const AddProduct&, const AddProduct&) = default;
};

struct SetSvmResult {
  ClassId cls = 0;
  friend bool operator==(const SetSvmResult&, const SetSvmResult&) = default;
};

using Action = std::variant<NoOp, WriteCode, SetDtResult, SetVote, AddProduct, SetSvmResult>;

// Action of the per-device init table, keyed implicitly on (mid, vid).
struct InitAction {
  std::optional<TreeInit> tree;
  std::vector<std::int64_t> accumulators;

  friend bool operator==(const InitAction&, const InitAction&) = default;
};

struct TableEntry {
  std::vector<MatchKey> keys;
  // Larger wins. Overlapping entries must differ in priority.
  std::uint32_t priority = 0;
  Action action;

  friend bool operator==(const TableEntry&, const TableEntry&) = default;
};

struct TableInstance {
  TableKind kind = TableKind::kDtLayer;
  int slot = 0;
  std::vector<TableEntry> entries;

  ResourceClass resource() const { return resource_of(kind); }

  friend bool operator==(const TableInstance&, const TableInstance&) = default;
};

struct ProgramStage {
  // Program stage index in a translated program; device stage index in an
  // install bundle.
  int index = 0;
  // Tree or hyperplane this stage serves (planner runs one segment at a time).
  int segment = 0;
  // Stages sharing a non-negative group must land on one device.
  int group = -1;
  std::vector<TableInstance> tables;

  friend bool operator==(const ProgramStage&, const ProgramStage&) = default;
};

struct ProgramInfo {
  int mid = 0;
  int vid = 0;
  ModelKind kind = ModelKind::kDecisionTree;
  int class_count = 0;
  int feature_count = 0;
  int code_bits = 34;
  // Features below this index are tested through f0, the rest through f1.
  int feature_boundary = 0;
  int tree_count = 0;
  int hyperplane_count = 0;
  std::vector<int> tree_depths;
  PacketLayout layout;

  friend bool operator==(const ProgramInfo&, const ProgramInfo&) = default;
};

// A translated model, or the slice of one installed on a single device.
struct TableProgram {
  ProgramInfo info;
  std::vector<ProgramStage> stages;
  std::optional<InitAction> init;
  // Index (in `stages` numbering) of the stage that completes inference.
  std::optional<int> final_stage;

  std::size_t entry_count() const;

  friend bool operator==(const TableProgram&, const TableProgram&) = default;
};

// Entries file: program header plus one record per entry (see FORMATS.md).
std::string serialize_program(const TableProgram& program);
TableProgram parse_program(std::string_view text);
TableProgram load_program(const std::filesystem::path& path);
void save_program(const TableProgram& program, const std::filesystem::path& path);

}  // namespace innet

#endif  // INNET_TABLE_PROGRAM_HPP_
