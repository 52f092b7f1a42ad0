// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#include "innet/translator.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "innet/error.hpp"
#include "innet/ternary.hpp"

namespace innet {
namespace {

constexpr int kMaxClasses = 16;  // RSLT and result slots are 4 bits wide

void check_config(const TranslatorConfig& cfg) {
  if (cfg.code_bits < 3 || cfg.code_bits > 64) {
    throw Error(ErrorCode::kInvalidArgument, "code_bits must be in [3, 64]");
  }
  if (cfg.mul_slots < 1) throw Error(ErrorCode::kInvalidArgument, "mul_slots must be >= 1");
  if (cfg.mid < 0 || cfg.mid > 15 || cfg.vid < 0 || cfg.vid > 15) {
    throw Error(ErrorCode::kInvalidArgument, "mid and vid must fit 4 bits");
  }
}

void check_classes(int class_count) {
  if (class_count < 1 || class_count > kMaxClasses) {
    throw Error(ErrorCode::kUnsupported,
                "class_count " + std::to_string(class_count) + " does not fit the 4-bit result field");
  }
}

std::vector<int> parents(const DecisionTreeModel& tree) {
  std::vector<int> parent(tree.nodes.size(), -1);
  for (const auto& n : tree.nodes) {
    if (n.leaf) continue;
    parent[static_cast<std::size_t>(n.left)] = n.id;
    parent[static_cast<std::size_t>(n.right)] = n.id;
  }
  return parent;
}

void check_tree(const DecisionTreeModel& tree, const TranslatorConfig& cfg, int tree_index) {
  const std::string where = tree_index < 0 ? std::string("tree") : "tree " + std::to_string(tree_index);
  if (tree.depth() > cfg.code_bits - 2) {
    throw Error(ErrorCode::kDepthExceeded, where + " depth " + std::to_string(tree.depth()) +
                                               " exceeds code_bits - 2 = " +
                                               std::to_string(cfg.code_bits - 2));
  }
  const std::uint64_t id_limit = width_mask(cfg.code_bits - 1);
  for (const auto& n : tree.nodes) {
    if (n.leaf && static_cast<std::uint64_t>(n.id) > id_limit) {
      throw Error(ErrorCode::kLeafIdOverflow,
                  where + " leaf id " + std::to_string(n.id) + " does not fit the leaf marker");
    }
  }
}

TableProgram empty_program(ModelKind kind, const QuantizationSpec& quant, const TranslatorConfig& cfg,
                           int class_count) {
  TableProgram p;
  p.info.mid = cfg.mid;
  p.info.vid = cfg.vid;
  p.info.kind = kind;
  p.info.class_count = class_count;
  p.info.feature_count = quant.feature_count;
  p.info.code_bits = cfg.code_bits;
  p.info.feature_boundary = feature_boundary(quant.feature_count);
  p.info.layout.feature_count = quant.feature_count;
  p.info.layout.value_bits = quant.value_bits;
  p.info.layout.code_bits = cfg.code_bits;
  p.info.layout.acc_bits = quant.acc_bits;
  return p;
}

std::optional<LoadFeature> root_load(const DecisionTreeModel& tree, int boundary) {
  const TreeNode& root = tree.node(tree.root);
  if (root.leaf) return std::nullopt;
  return LoadFeature{root.feature < boundary ? 0 : 1, root.feature};
}

// Appends tree `t`'s layer stages and its dt_predict stage.
void append_tree(TableProgram& p, const DecisionTreeModel& tree, int t,
                 const std::optional<TreeInit>& reinit, const QuantizationSpec& quant,
                 const TranslatorConfig& cfg) {
  const int w_c = cfg.code_bits;
  const int w_f = quant.value_bits;
  const int boundary = p.info.feature_boundary;
  const std::uint64_t max_value = quant.max_value();
  const auto codes = path_codes(tree);
  const int depth = tree.depth();

  auto write_child = [&](int reg, std::uint64_t parent_code, int bit, int child_id) -> Action {
    const TreeNode& c = tree.node(child_id);
    if (c.leaf) return WriteCode{reg, leaf_marker(c.id, w_c), std::nullopt};
    return WriteCode{reg, (parent_code << 1) | static_cast<std::uint64_t>(bit),
                     LoadFeature{c.feature < boundary ? 0 : 1, c.feature}};
  };

  std::vector<ProgramStage> layers(static_cast<std::size_t>(depth));
  for (int i = 0; i < depth; ++i) {
    auto& s = layers[static_cast<std::size_t>(i)];
    s.segment = t;
    s.tables.push_back(TableInstance{TableKind::kDtLayer, 0, {}});
    s.tables.push_back(TableInstance{TableKind::kDtLayer, 1, {}});
  }
  for (const auto& n : tree.nodes) {
    if (n.leaf) continue;
    const int i = n.depth;
    const int half = n.feature < boundary ? 0 : 1;
    const int match_reg = i % 2;
    const int write_reg = (i + 1) % 2;
    const std::uint64_t code = codes[static_cast<std::size_t>(n.id)];

    std::vector<TernaryKey> left_cover;
    std::vector<TernaryKey> right_cover;
    if (n.threshold >= 0) {
      const auto hi = std::min<std::uint64_t>(static_cast<std::uint64_t>(n.threshold), max_value);
      left_cover = range_to_ternary(0, hi, w_f);
    }
    if (n.threshold < static_cast<std::int64_t>(max_value)) {
      const auto lo = n.threshold < 0 ? 0 : static_cast<std::uint64_t>(n.threshold) + 1;
      right_cover = range_to_ternary(lo, max_value, w_f);
    }
    // The smaller side gets explicit prefix entries; ties go left.
    const bool explicit_left = left_cover.size() <= right_cover.size();
    const auto& cover = explicit_left ? left_cover : right_cover;
    const Action explicit_action =
        write_child(write_reg, code, explicit_left ? 0 : 1, explicit_left ? n.left : n.right);
    const Action fallback_action =
        write_child(write_reg, code, explicit_left ? 1 : 0, explicit_left ? n.right : n.left);

    const FieldRef code_field{FieldRef::Kind::kCode, match_reg, 0};
    const FieldRef feature_field{FieldRef::Kind::kFeatureReg, half, 0};
    auto& table = layers[static_cast<std::size_t>(i)].tables[static_cast<std::size_t>(half)];
    for (const auto& key : cover) {
      table.entries.push_back(TableEntry{
          {MatchKey{code_field, exact_key(code, w_c)}, MatchKey{feature_field, key}}, 2,
          explicit_action});
    }
    table.entries.push_back(TableEntry{
        {MatchKey{code_field, exact_key(code, w_c)}, MatchKey{feature_field, wildcard_key(w_f)}}, 1,
        fallback_action});
  }

  ProgramStage predict;
  predict.segment = t;
  TableInstance dt_predict{TableKind::kDtPredict, 0, {}};
  for (const auto& n : tree.nodes) {
    if (!n.leaf) continue;
    const auto [c0, c1] = final_registers(tree, n.id, w_c);
    dt_predict.entries.push_back(TableEntry{
        {MatchKey{FieldRef{FieldRef::Kind::kCode, 0, 0}, exact_key(c0, w_c)},
         MatchKey{FieldRef{FieldRef::Kind::kCode, 1, 0}, exact_key(c1, w_c)}},
        0, SetDtResult{t, n.label, reinit}});
  }
  predict.tables.push_back(std::move(dt_predict));

  for (auto& s : layers) {
    s.index = static_cast<int>(p.stages.size());
    p.stages.push_back(std::move(s));
  }
  predict.index = static_cast<int>(p.stages.size());
  p.stages.push_back(std::move(predict));
}

}  // namespace

std::uint64_t leaf_marker(int leaf_id, int code_bits) {
  return (std::uint64_t{1} << (code_bits - 1)) | static_cast<std::uint64_t>(leaf_id);
}

int feature_boundary(int feature_count) { return (feature_count + 1) / 2; }

std::vector<std::uint64_t> path_codes(const DecisionTreeModel& tree) {
  if (tree.depth() > 62) {
    throw Error(ErrorCode::kDepthExceeded, "tree too deep for 64-bit path codes");
  }
  std::vector<std::uint64_t> code(tree.nodes.size(), 0);
  std::vector<int> stack{tree.root};
  code[static_cast<std::size_t>(tree.root)] = 1;
  while (!stack.empty()) {
    const TreeNode& n = tree.node(stack.back());
    stack.pop_back();
    if (n.leaf) continue;
    const std::uint64_t c = code[static_cast<std::size_t>(n.id)];
    code[static_cast<std::size_t>(n.left)] = c << 1;
    code[static_cast<std::size_t>(n.right)] = (c << 1) | 1;
    stack.push_back(n.left);
    stack.push_back(n.right);
  }
  return code;
}

std::pair<std::uint64_t, std::uint64_t> final_registers(const DecisionTreeModel& tree, int leaf,
                                                        int code_bits) {
  const TreeNode& n = tree.node(leaf);
  if (n.depth == 0) return {1, 0};
  const auto parent = parents(tree)[static_cast<std::size_t>(leaf)];
  const auto codes = path_codes(tree);
  std::uint64_t regs[2];
  regs[n.depth % 2] = leaf_marker(leaf, code_bits);
  regs[(n.depth - 1) % 2] = codes[static_cast<std::size_t>(parent)];
  return {regs[0], regs[1]};
}

TableProgram translate_dt(const DecisionTreeModel& tree, const QuantizationSpec& quant,
                          const TranslatorConfig& cfg) {
  check_config(cfg);
  check_classes(tree.class_count);
  check_tree(tree, cfg, -1);
  TableProgram p = empty_program(ModelKind::kDecisionTree, quant, cfg, tree.class_count);
  p.info.tree_count = 1;
  p.info.tree_depths = {tree.depth()};
  p.info.layout.kind = IntermediateKind::kTree;
  p.info.layout.tree_slots = 1;
  p.init = InitAction{TreeInit{root_load(tree, p.info.feature_boundary)}, {}};
  append_tree(p, tree, 0, std::nullopt, quant, cfg);
  p.final_stage = static_cast<int>(p.stages.size()) - 1;
  return p;
}

TableProgram translate_rf(const RandomForestModel& forest, const QuantizationSpec& quant,
                          const TranslatorConfig& cfg) {
  check_config(cfg);
  check_classes(forest.class_count);
  const int n = static_cast<int>(forest.trees.size());
  if (n < 1) throw Error(ErrorCode::kInvalidModel, "forest has no trees");
  if (n > cfg.tree_slot_budget) {
    throw Error(ErrorCode::kBudgetExceeded, "forest has " + std::to_string(n) +
                                                " trees, tree-slot budget is " +
                                                std::to_string(cfg.tree_slot_budget));
  }
  for (int t = 0; t < n; ++t) check_tree(forest.trees[static_cast<std::size_t>(t)], cfg, t);

  TableProgram p = empty_program(ModelKind::kRandomForest, quant, cfg, forest.class_count);
  p.info.tree_count = n;
  p.info.layout.kind = IntermediateKind::kTree;
  p.info.layout.tree_slots = n;
  for (const auto& tree : forest.trees) p.info.tree_depths.push_back(tree.depth());
  p.init = InitAction{TreeInit{root_load(forest.trees[0], p.info.feature_boundary)}, {}};
  for (int t = 0; t < n; ++t) {
    std::optional<TreeInit> reinit;
    if (t + 1 < n) {
      reinit = TreeInit{root_load(forest.trees[static_cast<std::size_t>(t + 1)], p.info.feature_boundary)};
    }
    append_tree(p, forest.trees[static_cast<std::size_t>(t)], t, reinit, quant, cfg);
  }

  ProgramStage vote;
  vote.index = static_cast<int>(p.stages.size());
  vote.segment = n - 1;
  TableInstance table{TableKind::kMultitreeVoting, 0, {}};
  const int c = forest.class_count;
  std::vector<ClassId> combo(static_cast<std::size_t>(n), 0);
  while (true) {
    TableEntry e;
    for (int t = 0; t < n; ++t) {
      e.keys.push_back(MatchKey{FieldRef{FieldRef::Kind::kSlot, t, 0},
                                exact_key(static_cast<std::uint64_t>(combo[static_cast<std::size_t>(t)]),
                                          p.info.layout.slot_bits)});
    }
    e.action = SetVote{majority_vote(combo, c)};
    table.entries.push_back(std::move(e));
    int t = n - 1;
    while (t >= 0 && ++combo[static_cast<std::size_t>(t)] == c) combo[static_cast<std::size_t>(t--)] = 0;
    if (t < 0) break;
  }
  vote.tables.push_back(std::move(table));
  p.stages.push_back(std::move(vote));
  p.final_stage = static_cast<int>(p.stages.size()) - 1;
  return p;
}

TableProgram translate_svm(const SvmModel& svm, const QuantizationSpec& quant,
                           const TranslatorConfig& cfg) {
  check_config(cfg);
  check_classes(svm.class_count);
  const int h_count = static_cast<int>(svm.hyperplanes.size());
  if (h_count < 1) throw Error(ErrorCode::kInvalidModel, "svm has no hyperplanes");
  if (h_count > cfg.hyperplane_budget) {
    throw Error(ErrorCode::kBudgetExceeded, "svm has " + std::to_string(h_count) +
                                                " hyperplanes, budget is " +
                                                std::to_string(cfg.hyperplane_budget));
  }
  const int f_count = quant.feature_count;
  const int b = quant.svm_index_bits();
  const int shift = quant.svm_index_shift();
  const std::uint64_t levels = std::uint64_t{1} << b;
  const std::int64_t acc_lo =
      quant.acc_bits >= 64 ? std::numeric_limits<std::int64_t>::min() : -(std::int64_t{1} << (quant.acc_bits - 1));
  const std::int64_t acc_hi =
      quant.acc_bits >= 64 ? std::numeric_limits<std::int64_t>::max() : (std::int64_t{1} << (quant.acc_bits - 1)) - 1;

  TableProgram p = empty_program(ModelKind::kSvm, quant, cfg, svm.class_count);
  p.info.hyperplane_count = h_count;
  p.info.layout.kind = IntermediateKind::kSvm;
  p.info.layout.hyperplanes = h_count;
  InitAction init;

  for (int h = 0; h < h_count; ++h) {
    const Hyperplane& hp = svm.hyperplanes[static_cast<std::size_t>(h)];
    const std::int64_t bias = fixed_bias(hp.bias, quant);
    if (bias < acc_lo || bias > acc_hi) {
      throw Error(ErrorCode::kAccumulatorOverflow,
                  "hyperplane " + std::to_string(h) + " bias overflows the accumulator");
    }
    init.accumulators.push_back(bias);
    std::int64_t lo = bias;
    std::int64_t hi = bias;
    ProgramStage* stage = nullptr;
    for (int i = 0; i < f_count; ++i) {
      if (i % cfg.mul_slots == 0) {
        ProgramStage s;
        s.index = static_cast<int>(p.stages.size());
        s.segment = h;
        s.group = h;
        p.stages.push_back(std::move(s));
        stage = &p.stages.back();
      }
      TableInstance table{TableKind::kSvmMul, i % cfg.mul_slots, {}};
      table.entries.reserve(levels);
      std::int64_t pmin = std::numeric_limits<std::int64_t>::max();
      std::int64_t pmax = std::numeric_limits<std::int64_t>::min();
      const double w = hp.weights[static_cast<std::size_t>(i)];
      for (std::uint64_t idx = 0; idx < levels; ++idx) {
        const std::int64_t prod = fixed_product(w, static_cast<FeatureValue>(idx), quant);
        pmin = std::min(pmin, prod);
        pmax = std::max(pmax, prod);
        table.entries.push_back(TableEntry{
            {MatchKey{FieldRef{FieldRef::Kind::kFeature, i, shift}, exact_key(idx, b)}}, 0,
            AddProduct{h, prod}});
      }
      lo += pmin;
      hi += pmax;
      if (pmin < acc_lo || pmax > acc_hi || lo < acc_lo || hi > acc_hi) {
        throw Error(ErrorCode::kAccumulatorOverflow,
                    "accumulator overflow at hyperplane " + std::to_string(h) + ", feature " +
                        std::to_string(i));
      }
      stage->tables.push_back(std::move(table));
    }
  }

  ProgramStage predict;
  predict.index = static_cast<int>(p.stages.size());
  predict.segment = h_count - 1;
  TableInstance table{TableKind::kSvmPredict, 0, {}};
  for (std::uint32_t bits = 0; bits < (1u << h_count); ++bits) {
    table.entries.push_back(TableEntry{
        {MatchKey{FieldRef{FieldRef::Kind::kSvmCode, 0, 0}, exact_key(bits, h_count)}}, 0,
        SetSvmResult{svm_vote(svm, bits)}});
  }
  predict.tables.push_back(std::move(table));
  p.stages.push_back(std::move(predict));
  p.init = std::move(init);
  p.final_stage = static_cast<int>(p.stages.size()) - 1;
  return p;
}

TableProgram translate(const ModelSpec& model, const TranslatorConfig& cfg) {
  return std::visit(
      [&](const auto& body) -> TableProgram {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DecisionTreeModel>) {
          return translate_dt(body, model.quant, cfg);
        } else if constexpr (std::is_same_v<T, RandomForestModel>) {
          return translate_rf(body, model.quant, cfg);
        } else {
          return translate_svm(body, model.quant, cfg);
        }
      },
      model.body);
}

ResourceReport count_resources(const TableProgram& program) {
  ResourceReport r;
  for (const auto& s : program.stages) {
    StageUsage u{s.index, 0, 0};
    for (const auto& t : s.tables) {
      r.tables.push_back(TableUsage{s.index, t.kind, t.slot, t.entries.size()});
      (t.resource() == ResourceClass::kTcam ? u.tcam : u.sram) += t.entries.size();
    }
    r.total_tcam += u.tcam;
    r.total_sram += u.sram;
    r.stages.push_back(u);
  }
  r.total_stages = static_cast<int>(program.stages.size());
  const auto& depths = program.info.tree_depths;
  if (!depths.empty()) {
    r.mean_tree_depth =
        static_cast<double>(std::accumulate(depths.begin(), depths.end(), 0)) /
        static_cast<double>(depths.size());
  }
  return r;
}

}  // namespace innet
