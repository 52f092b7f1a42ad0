// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#include "innet/translator.hpp"

#include <gtest/gtest.h>

#include <random>

#include "innet/error.hpp"
#include "innet/network.hpp"
#include "innet/packet.hpp"
#include "oracles.hpp"

namespace innet {
namespace {

DecisionTreeModel stump(std::int64_t threshold = 5) {
  DecisionTreeModel t;
  t.class_count = 2;
  t.nodes = {TreeNode{0, false, 0, threshold, 1, 2, -1, 0}, TreeNode{1, true, -1, 0, -1, -1, 0, 0},
             TreeNode{2, true, -1, 0, -1, -1, 1, 0}};
  validate_tree(t, 1);
  return t;
}

std::size_t table_entries(const TableProgram& p, TableKind kind) {
  std::size_t n = 0;
  for (const auto& s : p.stages) {
    for (const auto& t : s.tables) {
      if (t.kind == kind) n += t.entries.size();
    }
  }
  return n;
}

ErrorCode error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kInvariant;
}

TEST(StatusCodes, Basics) {
  EXPECT_EQ(leaf_marker(5, 34), (std::uint64_t{1} << 33) | 5);
  EXPECT_EQ(feature_boundary(4), 2);
  EXPECT_EQ(feature_boundary(5), 3);
  EXPECT_EQ(feature_boundary(1), 1);
  const auto t = stump();
  const auto codes = path_codes(t);
  EXPECT_EQ(codes[0], 1u);
  EXPECT_EQ(codes[1], 0b10u);
  EXPECT_EQ(codes[2], 0b11u);
  EXPECT_EQ(final_registers(t, 1, 34), std::make_pair(std::uint64_t{1}, leaf_marker(1, 34)));
}

TEST(TranslateDt, LeafOnlyTree) {
  DecisionTreeModel t;
  t.class_count = 3;
  t.nodes = {TreeNode{0, true, -1, 0, -1, -1, 2, 0}};
  const auto p = translate(oracle::make_spec(t, oracle::quant_for(2, 8)));
  ASSERT_EQ(p.stages.size(), 1u);
  ASSERT_EQ(p.stages[0].tables.size(), 1u);
  const auto& e = p.stages[0].tables[0].entries;
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].keys[0].key.value, 1u);
  EXPECT_EQ(e[0].keys[1].key.value, 0u);
  EXPECT_EQ(std::get<SetDtResult>(e[0].action).cls, 2);
  EXPECT_EQ(oracle::SingleDevice(p).classify({9, 9}), 2);
}

TEST(TranslateDt, StumpResources) {
  const auto p = translate(oracle::make_spec(stump(), oracle::quant_for(1, 16)));
  const auto r = count_resources(p);
  EXPECT_EQ(r.total_tcam, 3u);
  EXPECT_EQ(r.total_sram, 2u);
  EXPECT_EQ(r.total_stages, 2);
  // [0, 5] needs two prefixes; the right side is the wildcard fallback.
  const auto& layer = p.stages[0].tables[0].entries;
  ASSERT_EQ(layer.size(), 3u);
  EXPECT_EQ(layer[0].priority, 2u);
  EXPECT_EQ(layer[2].priority, 1u);
  EXPECT_EQ(layer[2].keys[1].key.mask, 0u);
}

TEST(TranslateDt, LayerKeysFollowRegisterParity) {
  std::mt19937_64 rng(4);
  const auto tree = oracle::random_tree(rng, {6, 8, 6, 3, 0.9});
  const auto p = translate(oracle::make_spec(tree, oracle::quant_for(6, 8)));
  for (int i = 0; i < tree.depth(); ++i) {
    const auto& stage = p.stages[static_cast<std::size_t>(i)];
    ASSERT_EQ(stage.tables.size(), 2u);
    for (const auto& t : stage.tables) {
      for (const auto& e : t.entries) {
        EXPECT_EQ(e.keys[0].field.kind, FieldRef::Kind::kCode);
        EXPECT_EQ(e.keys[0].field.index, i % 2);
        EXPECT_EQ(e.keys[1].field.kind, FieldRef::Kind::kFeatureReg);
        EXPECT_EQ(e.keys[1].field.index, t.slot);
        EXPECT_EQ(std::get<WriteCode>(e.action).reg, (i + 1) % 2);
      }
    }
  }
}

TEST(TranslateDt, FeatureHalvesPickTheTable) {
  // Features 0, 1 go to dt_layer[0]; 2, 3 to dt_layer[1].
  for (int f = 0; f < 4; ++f) {
    DecisionTreeModel t;
    t.class_count = 2;
    t.nodes = {TreeNode{0, false, f, 100, 1, 2, -1, 0}, TreeNode{1, true, -1, 0, -1, -1, 0, 0},
               TreeNode{2, true, -1, 0, -1, -1, 1, 0}};
    const auto p = translate(oracle::make_spec(t, oracle::quant_for(4, 8)));
    const int expect = f < 2 ? 0 : 1;
    EXPECT_FALSE(p.stages[0].tables[static_cast<std::size_t>(expect)].entries.empty());
    EXPECT_TRUE(p.stages[0].tables[static_cast<std::size_t>(1 - expect)].entries.empty());
    ASSERT_TRUE(p.init && p.init->tree && p.init->tree->root);
    EXPECT_EQ(p.init->tree->root->reg, expect);
    EXPECT_EQ(p.init->tree->root->feature, f);
  }
}

TEST(TranslateDt, OutOfRangeThresholdsGiveEmptySides) {
  for (std::int64_t th : {std::int64_t{-1}, std::int64_t{255}}) {
    const auto p = translate(oracle::make_spec(stump(th), oracle::quant_for(1, 8)));
    EXPECT_EQ(p.stages[0].tables[0].entries.size(), 1u);
    const oracle::SingleDevice dev(p);
    for (FeatureValue x : {0u, 100u, 255u}) EXPECT_EQ(dev.classify({x}), th < 0 ? 1 : 0);
  }
}

// Per-layer TCAM equals the sum over that layer's nodes of (smaller prefix
// cover + 1), with cover sizes from the trie oracle.
TEST(TranslateDt, LayerTcamMatchesCoverOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int w = trial % 2 ? 16 : 6;
    const auto tree = oracle::random_tree(rng, {5, w, 7, 4, 0.75});
    const auto p = translate(oracle::make_spec(tree, oracle::quant_for(5, w)));
    const std::uint64_t max = width_mask(w);
    std::vector<std::size_t> expect(static_cast<std::size_t>(tree.depth()), 0);
    for (const auto& n : tree.nodes) {
      if (n.leaf) continue;
      const std::size_t left = n.threshold < 0 ? 0 : oracle::trie_cover_size(0, std::min<std::uint64_t>(n.threshold, max), w);
      const std::size_t right =
          n.threshold >= static_cast<std::int64_t>(max) ? 0 : oracle::trie_cover_size(n.threshold < 0 ? 0 : n.threshold + 1, max, w);
      expect[static_cast<std::size_t>(n.depth)] += std::min(left, right) + 1;
    }
    const auto r = count_resources(p);
    for (int i = 0; i < tree.depth(); ++i) EXPECT_EQ(r.stages[static_cast<std::size_t>(i)].tcam, expect[static_cast<std::size_t>(i)]);
    EXPECT_EQ(table_entries(p, TableKind::kDtPredict), static_cast<std::size_t>(tree.leaf_count()));
  }
}

TEST(TranslateDt, PredictEntriesDoNotDependOnFeatureCount) {
  std::mt19937_64 rng(10);
  const auto tree = oracle::random_tree(rng, {3, 8, 6, 3, 0.8});
  const auto a = translate(oracle::make_spec(tree, oracle::quant_for(3, 8)));
  const auto b = translate(oracle::make_spec(tree, oracle::quant_for(9, 8)));
  EXPECT_EQ(table_entries(a, TableKind::kDtPredict), table_entries(b, TableKind::kDtPredict));
}

// Walk a program with no final stage: the request comes back carrying the
// registers, which must equal the analytic pair for the leaf reached.
TEST(TranslateDt, FinalRegistersMatchAnalyticPair) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const auto tree = oracle::random_tree(rng, {3, 5, 6, 3, 0.8});
    auto p = translate(oracle::make_spec(tree, oracle::quant_for(3, 5)));
    p.final_stage.reset();
    DeviceConfig cfg;
    cfg.stage_count = static_cast<int>(p.stages.size());
    Network net(line(1, cfg));
    net.registry().add(p.info);
    net.device(0).install(p);
    net.install_route(1, {0}, 1);
    for (int n = 0; n < 200; ++n) {
      const auto x = oracle::random_input(rng, 3, 5);
      const Delivery d = net.send(0, oracle::request_frame(p.info, x, 1, 1));
      const Packet back = decode(d.frame.payload, p.info.layout);
      const auto& t = std::get<TreeIntermediates>(back.intermediates);
      const int leaf = tree_path(tree, x).back();
      EXPECT_EQ(std::make_pair(t.code0, t.code1), final_registers(tree, leaf, 34));
      EXPECT_EQ(t.slots[0], predict_tree(tree, x));
    }
  }
}

TEST(TranslateDt, Errors) {
  const auto deep = oracle::spine_tree(10, 2, 8, 2);
  TranslatorConfig cfg;
  cfg.code_bits = 11;
  EXPECT_EQ(error_of([&] { translate(oracle::make_spec(deep, oracle::quant_for(2, 8)), cfg); }),
            ErrorCode::kDepthExceeded);
  cfg.code_bits = 12;
  EXPECT_NO_THROW(translate(oracle::make_spec(deep, oracle::quant_for(2, 8)), cfg));

  DecisionTreeModel many;
  many.class_count = 17;
  many.nodes = {TreeNode{0, true, -1, 0, -1, -1, 16, 0}};
  EXPECT_EQ(error_of([&] { translate(oracle::make_spec(many, oracle::quant_for(1, 8))); }),
            ErrorCode::kUnsupported);
}

TEST(TranslateRf, VotingTable) {
  RandomForestModel one;
  one.class_count = 3;
  one.trees = {stump()};
  one.trees[0].class_count = 3;
  const auto p1 = translate(oracle::make_spec(one, oracle::quant_for(1, 8)));
  const auto& v1 = p1.stages.back().tables[0];
  ASSERT_EQ(v1.kind, TableKind::kMultitreeVoting);
  ASSERT_EQ(v1.entries.size(), 3u);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(v1.entries[c].keys[0].key.value, c);
    EXPECT_EQ(std::get<SetVote>(v1.entries[c].action).cls, static_cast<ClassId>(c));
  }

  RandomForestModel three;
  three.class_count = 2;
  three.trees = {stump(), stump(), stump()};
  const auto p3 = translate(oracle::make_spec(three, oracle::quant_for(1, 8)));
  const auto& v3 = p3.stages.back().tables[0];
  ASSERT_EQ(v3.entries.size(), 8u);
  auto vote_for = [&](std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    for (const auto& e : v3.entries) {
      if (e.keys[0].key.value == a && e.keys[1].key.value == b && e.keys[2].key.value == c) {
        return std::get<SetVote>(e.action).cls;
      }
    }
    return -1;
  };
  EXPECT_EQ(vote_for(0, 0, 1), 0);
  EXPECT_EQ(vote_for(1, 0, 1), 1);
}

TEST(TranslateRf, LayoutAndBudget) {
  std::mt19937_64 rng(2);
  const auto rf = oracle::random_forest(rng, 3, {4, 8, 4, 3, 0.7});
  const auto p = translate(oracle::make_spec(rf, oracle::quant_for(4, 8)));
  EXPECT_EQ(p.info.tree_count, 3);
  EXPECT_EQ(p.info.layout.tree_slots, 3);
  int expect_stages = 1;
  double depth_sum = 0;
  for (const auto& t : rf.trees) {
    expect_stages += t.depth() + 1;
    depth_sum += t.depth();
  }
  const auto r = count_resources(p);
  EXPECT_EQ(r.total_stages, expect_stages);
  EXPECT_DOUBLE_EQ(r.mean_tree_depth, depth_sum / 3);
  EXPECT_EQ(table_entries(p, TableKind::kMultitreeVoting), 27u);
  // Segments follow trees; the vote stage rides with the last one.
  EXPECT_EQ(p.stages.front().segment, 0);
  EXPECT_EQ(p.stages.back().segment, 2);

  TranslatorConfig cfg;
  cfg.tree_slot_budget = 2;
  EXPECT_EQ(error_of([&] { translate(oracle::make_spec(rf, oracle::quant_for(4, 8)), cfg); }),
            ErrorCode::kBudgetExceeded);
}

TEST(TranslateSvm, ZeroModelAlwaysPositive) {
  SvmModel svm;
  svm.class_count = 2;
  svm.hyperplanes = {Hyperplane{{0.0}, 0.0, 0, 1}};
  const auto p = translate(oracle::make_spec(svm, oracle::quant_for(1, 6)));
  for (const auto& s : p.stages) {
    for (const auto& t : s.tables) {
      if (t.kind != TableKind::kSvmMul) continue;
      EXPECT_EQ(t.entries.size(), 64u);
      for (const auto& e : t.entries) EXPECT_EQ(std::get<AddProduct>(e.action).product, 0);
    }
  }
  const oracle::SingleDevice dev(p);
  for (FeatureValue x = 0; x < 64; ++x) EXPECT_EQ(dev.classify({x}), 0);
}

TEST(TranslateSvm, FixedPointExampleThroughPipeline) {
  SvmModel svm;
  svm.class_count = 2;
  svm.hyperplanes = {Hyperplane{{1.0, -2.0}, 0.5, 0, 1}};
  QuantizationSpec q = oracle::quant_for(2, 4);
  q.scale_shift = 8;
  const auto p = translate(oracle::make_spec(svm, q));
  ASSERT_TRUE(p.init);
  EXPECT_EQ(p.init->accumulators, (std::vector<std::int64_t>{128}));
  EXPECT_EQ(oracle::SingleDevice(p).classify({4, 8}), 1);
}

TEST(TranslateSvm, StagesGroupsAndTableSizes) {
  std::mt19937_64 rng(6);
  const auto svm = oracle::random_svm(rng, 10, 3, VoteScheme::kOneVsOne);
  TranslatorConfig cfg;
  cfg.mul_slots = 4;
  const auto p = translate(oracle::make_spec(svm, oracle::quant_for(10, 16)), cfg);
  // ceil(10 / 4) = 3 stages per hyperplane, plus svm_predict.
  ASSERT_EQ(p.stages.size(), 10u);
  for (int h = 0; h < 3; ++h) {
    for (int k = 0; k < 3; ++k) {
      const auto& s = p.stages[static_cast<std::size_t>(h * 3 + k)];
      EXPECT_EQ(s.group, h);
      EXPECT_EQ(s.segment, h);
      for (const auto& t : s.tables) EXPECT_EQ(t.entries.size(), 1024u);
    }
  }
  EXPECT_EQ(p.stages.back().tables[0].entries.size(), 8u);
}

TEST(TranslateSvm, OverflowNamesHyperplaneAndFeature) {
  SvmModel svm;
  svm.class_count = 2;
  svm.hyperplanes = {Hyperplane{{0.5, 0.9, 0.9}, 0.0, 0, 1}};
  QuantizationSpec q = oracle::quant_for(3, 8);
  q.scale_shift = 8;
  q.acc_bits = 10;  // range [-512, 511]; each product reaches ~229
  try {
    translate(oracle::make_spec(svm, q));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAccumulatorOverflow);
    EXPECT_NE(std::string(e.what()).find("hyperplane 0, feature 2"), std::string::npos) << e.what();
  }
}

TEST(Fidelity, ExhaustiveSmallModels) {
  std::mt19937_64 rng(99);
  const auto inputs = oracle::all_inputs(3, 4);
  for (int trial = 0; trial < 6; ++trial) {
    const auto q = oracle::quant_for(3, 4);
    std::vector<ModelSpec> models = {
        oracle::make_spec(oracle::random_tree(rng, {3, 4, 5, 3, 0.8}), q),
        oracle::make_spec(oracle::random_forest(rng, 3, {3, 4, 4, 3, 0.8}), q),
        oracle::make_spec(oracle::random_svm(rng, 3, 3, VoteScheme::kOneVsOne), q),
        oracle::make_spec(oracle::random_svm(rng, 3, 3, VoteScheme::kOneVsRest), q),
    };
    for (const auto& m : models) {
      const oracle::SingleDevice dev(translate(m));
      for (const auto& x : inputs) ASSERT_EQ(dev.classify(x), reference_predict(m, x)) << to_string(m.kind());
    }
  }
}

}  // namespace
}  // namespace innet
