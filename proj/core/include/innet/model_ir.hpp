// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef INNET_MODEL_IR_HPP_
#define INNET_MODEL_IR_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace innet {

using ClassId = int;
using FeatureValue = std::uint32_t;
using FeatureVector = std::vector<FeatureValue>;

// Fixed-point layout shared by the exchange format, the oracle and the
// translated tables.
//
// Quantized features are integers in [0, 2^value_bits). For SVM arithmetic a
// feature q is first reduced to an index of `svm_index_bits()` bits by
// dropping low bits, and the index dequantizes to idx / 2^svm_index_bits(),
// a value in [0, 1). Products and biases are scaled by 2^scale_shift and
// rounded half away from zero; sums wrap in acc_bits two's complement.
struct QuantizationSpec {
  int feature_count = 1;
  int value_bits = 16;
  int scale_shift = 16;
  int acc_bits = 32;
  int mul_index_bits = 10;

  std::uint64_t max_value() const { return (std::uint64_t{1} << value_bits) - 1; }
  int svm_index_bits() const { return value_bits < mul_index_bits ? value_bits : mul_index_bits; }
  int svm_index_shift() const { return value_bits - svm_index_bits(); }

  void validate() const;

  friend bool operator==(const QuantizationSpec&, const QuantizationSpec&) = default;
};

struct TreeNode {
  int id = 0;
  bool leaf = false;
  // Internal nodes: go left iff features[feature] <= threshold.
  int feature = -1;
  std::int64_t threshold = 0;
  int left = -1;
  int right = -1;
  // Leaves only.
  ClassId label = -1;
  // Filled in by validation; root is depth 0.
  int depth = 0;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// Node ids are dense: nodes[i].id == i.
struct DecisionTreeModel {
  int root = 0;
  std::vector<TreeNode> nodes;
  int class_count = 0;

  const TreeNode& node(int id) const { return nodes.at(static_cast<std::size_t>(id)); }
  int depth() const;
  int leaf_count() const;
  int internal_count() const;

  friend bool operator==(const DecisionTreeModel&, const DecisionTreeModel&) = default;
};

// Majority vote over member trees; ties go to the lowest class index.
struct RandomForestModel {
  std::vector<DecisionTreeModel> trees;
  int class_count = 0;

  friend bool operator==(const RandomForestModel&, const RandomForestModel&) = default;
};

enum class VoteScheme { kOneVsOne, kOneVsRest };

// One separating hyperplane. For one-vs-one a non-negative score votes for
// class_a and a negative score for class_b. For one-vs-rest hyperplane h
// belongs to class h and only a non-negative score casts a vote.
struct Hyperplane {
  std::vector<double> weights;
  double bias = 0.0;
  ClassId class_a = -1;
  ClassId class_b = -1;

  friend bool operator==(const Hyperplane&, const Hyperplane&) = default;
};

struct SvmModel {
  std::vector<Hyperplane> hyperplanes;
  VoteScheme scheme = VoteScheme::kOneVsOne;
  int class_count = 0;

  friend bool operator==(const SvmModel&, const SvmModel&) = default;
};

enum class ModelKind { kDecisionTree, kRandomForest, kSvm };

std::string_view to_string(ModelKind kind);

struct ModelSpec {
  std::string name;
  QuantizationSpec quant;
  std::variant<DecisionTreeModel, RandomForestModel, SvmModel> body;

  ModelKind kind() const;
  int class_count() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Exchange format (see FORMATS.md). All loaders validate before returning.
ModelSpec parse_model(std::string_view text);
ModelSpec load_model(const std::filesystem::path& path);
std::string serialize_model(const ModelSpec& model);
void save_model(const ModelSpec& model, const std::filesystem::path& path);

// Checks every structural invariant and fills TreeNode::depth. Throws
// kInvalidModel naming the offending node / tree / hyperplane.
void validate_model(ModelSpec& model);
void validate_tree(DecisionTreeModel& tree, int feature_count);

// Reference semantics. These are total on inputs of the right arity.
ClassId reference_predict(const ModelSpec& model, std::span<const FeatureValue> features);
ClassId predict_tree(const DecisionTreeModel& tree, std::span<const FeatureValue> features);
// Node ids visited root-to-leaf.
std::vector<int> tree_path(const DecisionTreeModel& tree, std::span<const FeatureValue> features);
ClassId majority_vote(std::span<const ClassId> votes, int class_count);

// SVM fixed-point arithmetic.
FeatureValue svm_index(FeatureValue q, const QuantizationSpec& quant);
std::int64_t fixed_bias(double bias, const QuantizationSpec& quant);
std::int64_t fixed_product(double weight, FeatureValue index, const QuantizationSpec& quant);
std::int64_t wrap_signed(std::int64_t value, int bits);
std::vector<std::int64_t> svm_accumulators(const SvmModel& svm, const QuantizationSpec& quant,
                                           std::span<const FeatureValue> features);
// Bit h of `sign_bits` is the sign bit of hyperplane h's accumulator.
ClassId svm_vote(const SvmModel& svm, std::uint32_t sign_bits);
std::uint32_t svm_sign_bits(std::span<const std::int64_t> accumulators);

// Float-precision SVM prediction on dequantized inputs (q / 2^value_bits);
// used only to measure quantization loss. Trees fall back to reference_predict.
ClassId float_predict(const ModelSpec& model, std::span<const FeatureValue> features);

struct Sample {
  FeatureVector features;
  ClassId label = 0;
};

struct Dataset {
  std::string name;
  int feature_count = 0;
  std::vector<Sample> rows;
};

// CSV: one row per sample, quantized integer features then the label. A first
// line that does not start with a digit is treated as a header.
Dataset load_dataset_csv(const std::filesystem::path& path);
void save_dataset_csv(const Dataset& data, const std::filesystem::path& path);
void validate_dataset(const Dataset& data, const QuantizationSpec& quant, int class_count);

struct MinMaxScaler {
  std::vector<double> min;
  std::vector<double> max;

  // Throws kInvalidArgument naming the first constant feature.
  static MinMaxScaler fit(const std::vector<std::vector<double>>& train_rows);
  FeatureVector transform(std::span<const double> row, int value_bits) const;
};

// floor((x - min) / (max - min) * (2^W - 1)) clamped to [0, 2^W - 1], with
// min/max fitted on `train` and reused for `rows`.
Dataset quantize_dataset(const std::vector<std::vector<double>>& rows,
                         const std::vector<ClassId>& labels, const MinMaxScaler& scaler,
                         const QuantizationSpec& quant, std::string name = {});

}  // namespace innet

#endif  // INNET_MODEL_IR_HPP_
