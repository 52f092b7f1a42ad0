// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#include "innet/table_program.hpp"

#include <gtest/gtest.h>

#include <random>

#include "innet/error.hpp"
#include "innet/translator.hpp"
#include "oracles.hpp"

namespace innet {
namespace {

TEST(FieldRef, ParseAndPrint) {
  for (const char* text : {"code0", "code1", "f0", "f1", "feature[3]", "feature[12]>>6", "slot[2]", "svm_code"}) {
    EXPECT_EQ(FieldRef::parse(text).to_string(), text);
  }
  const FieldRef f = FieldRef::parse("feature[12]>>6");
  EXPECT_EQ(f.kind, FieldRef::Kind::kFeature);
  EXPECT_EQ(f.index, 12);
  EXPECT_EQ(f.shift, 6);
  for (const char* bad : {"code2", "f", "slot[1]>>2", "feature[", "bogus"}) {
    EXPECT_THROW(FieldRef::parse(bad), Error) << bad;
  }
}

TEST(TableKind, NamesAndResources) {
  for (auto k : {TableKind::kDtLayer, TableKind::kDtPredict, TableKind::kMultitreeVoting, TableKind::kSvmMul,
                 TableKind::kSvmPredict}) {
    EXPECT_EQ(table_kind_from_string(to_string(k)), k);
  }
  EXPECT_EQ(resource_of(TableKind::kDtLayer), ResourceClass::kTcam);
  EXPECT_EQ(resource_of(TableKind::kDtPredict), ResourceClass::kSram);
  EXPECT_EQ(resource_of(TableKind::kSvmMul), ResourceClass::kSram);
  try {
    table_kind_from_string("dt_magic");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownTable);
  }
}

TEST(EntriesFile, RoundTripsTranslatedPrograms) {
  std::mt19937_64 rng(21);
  TranslatorConfig cfg;
  cfg.mid = 3;
  cfg.vid = 9;
  for (int i = 0; i < 10; ++i) {
    const auto dt = translate(oracle::make_spec(oracle::random_tree(rng, {}), oracle::quant_for(4, 8)), cfg);
    EXPECT_EQ(parse_program(serialize_program(dt)), dt);
    const auto rf = translate(oracle::make_spec(oracle::random_forest(rng, 3, {}), oracle::quant_for(4, 8)), cfg);
    EXPECT_EQ(parse_program(serialize_program(rf)), rf);
    const auto svm = translate(
        oracle::make_spec(oracle::random_svm(rng, 3, 3, VoteScheme::kOneVsOne), oracle::quant_for(3, 6)), cfg);
    EXPECT_EQ(parse_program(serialize_program(svm)), svm);
  }
}

TEST(EntriesFile, OneRecordPerLine) {
  DecisionTreeModel t;
  t.class_count = 2;
  t.nodes = {TreeNode{0, false, 0, 5, 1, 2, -1, 0}, TreeNode{1, true, -1, 0, -1, -1, 0, 0},
             TreeNode{2, true, -1, 0, -1, -1, 1, 0}};
  const auto program = translate(oracle::make_spec(t, oracle::quant_for(1, 16)));
  const std::string text = serialize_program(program);
  std::size_t records = 0;
  for (std::size_t pos = 0; (pos = text.find("{\"action\"", pos)) != std::string::npos; ++pos) ++records;
  EXPECT_EQ(records, program.entry_count());
  EXPECT_EQ(program.entry_count(), 5u);
}

std::string minimal_with(const std::string& stages, const std::string& entries) {
  return R"({"format_version": 1, "program": {"mid": 0, "vid": 0, "model_type": "dt", "class_count": 2,
    "feature_count": 1, "code_bits": 34, "feature_boundary": 1, "tree_count": 1, "hyperplane_count": 0,
    "tree_depths": [0], "layout": {"feature_count": 1, "value_bits": 8, "intermediates": "tree",
    "code_bits": 34, "tree_slots": 1, "slot_bits": 4, "hyperplanes": 0, "acc_bits": 32}},
    "stages": )" + stages + R"(, "entries": )" + entries + "}";
}

ErrorCode parse_error(const std::string& text) {
  try {
    parse_program(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parsed";
  return ErrorCode::kInvariant;
}

TEST(EntriesFile, ParseErrors) {
  const std::string stage = R"([{"index": 0, "tables": [{"table": "dt_predict", "slot": 0, "entries": 1}]}])";
  const std::string entry = R"([{"stage": 0, "table": "dt_predict", "slot": 0, "priority": 0,
    "keys": [{"field": "code0", "value": 1, "width": 34}], "action": {"op": "set_dt_result", "slot": 0, "class": 1}}])";
  EXPECT_NO_THROW(parse_program(minimal_with(stage, entry)));
  EXPECT_EQ(parse_error(minimal_with(stage, "[]")), ErrorCode::kParse);
  const std::string wrong_table = R"([{"stage": 0, "table": "svm_predict", "slot": 0, "priority": 0,
    "keys": [], "action": {"op": "noop"}}])";
  EXPECT_EQ(parse_error(minimal_with(stage, wrong_table)), ErrorCode::kUnknownTable);
  const std::string dup = R"([{"index": 0, "tables": [{"table": "dt_predict", "slot": 0, "entries": 0},
    {"table": "dt_predict", "slot": 0, "entries": 0}]}])";
  EXPECT_EQ(parse_error(minimal_with(dup, "[]")), ErrorCode::kParse);
  const std::string bad_op = R"([{"stage": 0, "table": "dt_predict", "slot": 0, "priority": 0,
    "keys": [], "action": {"op": "explode"}}])";
  EXPECT_EQ(parse_error(minimal_with(stage, bad_op)), ErrorCode::kParse);
  EXPECT_EQ(parse_error("[]"), ErrorCode::kParse);
}

}  // namespace
}  // namespace innet
