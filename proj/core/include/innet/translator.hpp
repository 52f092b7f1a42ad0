// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef INNET_TRANSLATOR_HPP_
#define INNET_TRANSLATOR_HPP_

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "innet/model_ir.hpp"
#include "innet/table_program.hpp"

namespace innet {

struct TranslatorConfig {
  // Width of the code0/code1 status registers. Trees may be at most
  // code_bits - 2 deep.
  int code_bits = 34;
  int tree_slot_budget = 4;
  int hyperplane_budget = 4;
  // svm_mul tables that share one pipeline stage.
  int mul_slots = 8;
  int mid = 0;
  int vid = 0;
};

// Status-code scheme. A node at depth d carries a (d+1)-bit code: a leading 1
// followed by its branch bits (0 = left). Reaching a leaf writes its marker,
// which no downstream dt_layer entry matches.
std::uint64_t leaf_marker(int leaf_id, int code_bits);
std::vector<std::uint64_t> path_codes(const DecisionTreeModel& tree);
// Features below the boundary are tested through f0, the rest through f1.
int feature_boundary(int feature_count);
// (code0, code1) after a packet has walked to `leaf`.
std::pair<std::uint64_t, std::uint64_t> final_registers(const DecisionTreeModel& tree, int leaf,
                                                        int code_bits);

TableProgram translate(const ModelSpec& model, const TranslatorConfig& cfg = {});
TableProgram translate_dt(const DecisionTreeModel& tree, const QuantizationSpec& quant,
                          const TranslatorConfig& cfg = {});
TableProgram translate_rf(const RandomForestModel& forest, const QuantizationSpec& quant,
                          const TranslatorConfig& cfg = {});
TableProgram translate_svm(const SvmModel& svm, const QuantizationSpec& quant,
                           const TranslatorConfig& cfg = {});

struct TableUsage {
  int stage = 0;
  TableKind kind = TableKind::kDtLayer;
  int slot = 0;
  std::size_t entries = 0;
};

struct StageUsage {
  int stage = 0;
  std::size_t tcam = 0;
  std::size_t sram = 0;
};

struct ResourceReport {
  std::vector<StageUsage> stages;
  std::vector<TableUsage> tables;
  std::size_t total_tcam = 0;
  std::size_t total_sram = 0;
  int total_stages = 0;
  // Average per-tree depth, the stage usage reported for forests. Zero for SVM.
  double mean_tree_depth = 0.0;
};

ResourceReport count_resources(const TableProgram& program);

}  // namespace innet

#endif  // INNET_TRANSLATOR_HPP_
