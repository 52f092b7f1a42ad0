// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#include "innet/model_ir.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include "innet/error.hpp"
#include "json_util.hpp"

namespace innet {

using nlohmann::json;

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kDecisionTree: return "dt";
    case ModelKind::kRandomForest: return "rf";
    case ModelKind::kSvm: return "svm";
  }
  return "?";
}

void QuantizationSpec::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidModel, "quantization: " + what);
  };
  if (feature_count < 1) fail("feature_count must be >= 1");
  if (value_bits < 1 || value_bits > 32) fail("value_bits must be in [1, 32]");
  if (scale_shift < 0 || scale_shift > 62) fail("scale_shift must be in [0, 62]");
  if (acc_bits < 2 || acc_bits > 64) fail("acc_bits must be in [2, 64]");
  if (mul_index_bits < 1 || mul_index_bits > 32) fail("mul_index_bits must be in [1, 32]");
}

int DecisionTreeModel::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

int DecisionTreeModel::leaf_count() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(),
                                        [](const TreeNode& n) { return n.leaf; }));
}

int DecisionTreeModel::internal_count() const {
  return static_cast<int>(nodes.size()) - leaf_count();
}

ModelKind ModelSpec::kind() const {
  switch (body.index()) {
    case 0: return ModelKind::kDecisionTree;
    case 1: return ModelKind::kRandomForest;
    default: return ModelKind::kSvm;
  }
}

int ModelSpec::class_count() const {
  return std::visit([](const auto& m) { return m.class_count; }, body);
}

// ---------------------------------------------------------------------------
// Validation

void validate_tree(DecisionTreeModel& tree, int feature_count) {
  auto fail = [](int id, const std::string& what) {
    std::ostringstream msg;
    msg << "tree node " << id << ": " << what;
    throw Error(ErrorCode::kInvalidModel, msg.str());
  };
  if (tree.nodes.empty()) throw Error(ErrorCode::kInvalidModel, "tree has no nodes");
  if (tree.class_count < 1) throw Error(ErrorCode::kInvalidModel, "class_count must be >= 1");
  const int n = static_cast<int>(tree.nodes.size());
  for (int i = 0; i < n; ++i) {
    if (tree.nodes[static_cast<std::size_t>(i)].id != i) {
      fail(tree.nodes[static_cast<std::size_t>(i)].id, "node ids must be dense and ordered");
    }
  }
  if (tree.root < 0 || tree.root >= n) fail(tree.root, "root id not in node table");

  std::vector<int> parents(static_cast<std::size_t>(n), 0);
  for (const auto& node : tree.nodes) {
    if (node.leaf) {
      if (node.label < 0 || node.label >= tree.class_count) {
        fail(node.id, "label " + std::to_string(node.label) + " out of range");
      }
      continue;
    }
    if (node.feature < 0 || node.feature >= feature_count) {
      fail(node.id, "feature index " + std::to_string(node.feature) + " out of range");
    }
    for (int child : {node.left, node.right}) {
      if (child < 0 || child >= n) fail(node.id, "dangling child id " + std::to_string(child));
      if (child == tree.root) fail(node.id, "child points at root");
      ++parents[static_cast<std::size_t>(child)];
    }
    if (node.left == node.right) fail(node.id, "left and right children coincide");
  }
  for (int i = 0; i < n; ++i) {
    if (i != tree.root && parents[static_cast<std::size_t>(i)] != 1) {
      fail(i, parents[static_cast<std::size_t>(i)] == 0 ? "unreachable from root"
                                                         : "has more than one parent");
    }
  }

  // Single-parent + all-reachable means the BFS below visits every node once.
  std::queue<int> pending;
  tree.nodes[static_cast<std::size_t>(tree.root)].depth = 0;
  pending.push(tree.root);
  int visited = 0;
  while (!pending.empty()) {
    const int id = pending.front();
    pending.pop();
    ++visited;
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
    if (node.leaf) continue;
    for (int child : {node.left, node.right}) {
      tree.nodes[static_cast<std::size_t>(child)].depth = node.depth + 1;
      pending.push(child);
    }
  }
  if (visited != n) throw Error(ErrorCode::kInvalidModel, "tree contains a cycle");
}

void validate_model(ModelSpec& model) {
  model.quant.validate();
  const int features = model.quant.feature_count;
  if (auto* dt = std::get_if<DecisionTreeModel>(&model.body)) {
    validate_tree(*dt, features);
  } else if (auto* rf = std::get_if<RandomForestModel>(&model.body)) {
    if (rf->trees.empty()) throw Error(ErrorCode::kInvalidModel, "forest has no trees");
    if (rf->class_count < 1) throw Error(ErrorCode::kInvalidModel, "class_count must be >= 1");
    for (std::size_t t = 0; t < rf->trees.size(); ++t) {
      auto& tree = rf->trees[t];
      if (tree.class_count != rf->class_count) {
        throw Error(ErrorCode::kInvalidModel,
                    "tree " + std::to_string(t) + ": class_count differs from forest");
      }
      try {
        validate_tree(tree, features);
      } catch (const Error& e) {
        throw Error(e.code(), "tree " + std::to_string(t) + ": " + e.what());
      }
    }
  } else {
    auto& svm = std::get<SvmModel>(model.body);
    const int c = svm.class_count;
    const int h = static_cast<int>(svm.hyperplanes.size());
    if (c < 2) throw Error(ErrorCode::kInvalidModel, "svm needs at least 2 classes");
    if (h < 1) throw Error(ErrorCode::kInvalidModel, "svm has no hyperplanes");
    if (svm.scheme == VoteScheme::kOneVsOne && h != c * (c - 1) / 2) {
      throw Error(ErrorCode::kInvalidModel, "one-vs-one svm needs C*(C-1)/2 hyperplanes, got " +
                                                std::to_string(h));
    }
    if (svm.scheme == VoteScheme::kOneVsRest && h != c) {
      throw Error(ErrorCode::kInvalidModel,
                  "one-vs-rest svm needs one hyperplane per class, got " + std::to_string(h));
    }
    for (int i = 0; i < h; ++i) {
      const auto& hp = svm.hyperplanes[static_cast<std::size_t>(i)];
      const std::string where = "hyperplane " + std::to_string(i) + ": ";
      if (static_cast<int>(hp.weights.size()) != features) {
        throw Error(ErrorCode::kInvalidModel, where + "weight count differs from feature_count");
      }
      if (!std::isfinite(hp.bias) ||
          !std::all_of(hp.weights.begin(), hp.weights.end(), [](double w) { return std::isfinite(w); })) {
        throw Error(ErrorCode::kInvalidModel, where + "non-finite parameter");
      }
      if (svm.scheme == VoteScheme::kOneVsOne) {
        if (hp.class_a < 0 || hp.class_a >= c || hp.class_b < 0 || hp.class_b >= c ||
            hp.class_a == hp.class_b) {
          throw Error(ErrorCode::kInvalidModel, where + "invalid class pair");
        }
      } else if (hp.class_a != i) {
        throw Error(ErrorCode::kInvalidModel, where + "one-vs-rest hyperplane must belong to class " +
                                                  std::to_string(i));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Exchange format

namespace {

constexpr int kFormatVersion = 1;

DecisionTreeModel tree_from_json(const json& j, int class_count) {
  DecisionTreeModel tree;
  tree.class_count = class_count;
  tree.root = j.at("root").get<int>();
  for (const auto& jn : j.at("nodes")) {
    TreeNode node;
    node.id = jn.at("id").get<int>();
    if (jn.contains("label")) {
      node.leaf = true;
      node.label = jn.at("label").get<int>();
    } else {
      node.feature = jn.at("feature").get<int>();
      node.threshold = jn.at("threshold").get<std::int64_t>();
      node.left = jn.at("left").get<int>();
      node.right = jn.at("right").get<int>();
    }
    tree.nodes.push_back(node);
  }
  std::stable_sort(tree.nodes.begin(), tree.nodes.end(),
                   [](const TreeNode& a, const TreeNode& b) { return a.id < b.id; });
  return tree;
}

json tree_to_json(const DecisionTreeModel& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    if (n.leaf) {
      nodes.push_back({{"id", n.id}, {"label", n.label}});
    } else {
      nodes.push_back({{"id", n.id},
                       {"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right}});
    }
  }
  return {{"root", tree.root}, {"nodes", std::move(nodes)}};
}

}  // namespace

ModelSpec parse_model(std::string_view text) {
  ModelSpec model;
  try {
    const json j = json::parse(text);
    const int version = j.at("format_version").get<int>();
    if (version != kFormatVersion) {
      throw Error(ErrorCode::kParse, "unsupported format_version " + std::to_string(version));
    }
    model.name = j.value("name", std::string{});
    const json& q = j.at("quantization");
    model.quant.feature_count = q.at("feature_count").get<int>();
    model.quant.value_bits = q.value("value_bits", 16);
    model.quant.scale_shift = q.value("scale_shift", 16);
    model.quant.acc_bits = q.value("acc_bits", 32);
    model.quant.mul_index_bits = q.value("mul_index_bits", 10);
    const int classes = j.at("class_count").get<int>();
    const std::string type = j.at("model_type").get<std::string>();
    if (type == "dt") {
      model.body = tree_from_json(j.at("tree"), classes);
    } else if (type == "rf") {
      RandomForestModel rf;
      rf.class_count = classes;
      for (const auto& jt : j.at("trees")) rf.trees.push_back(tree_from_json(jt, classes));
      model.body = std::move(rf);
    } else if (type == "svm") {
      SvmModel svm;
      svm.class_count = classes;
      const json& js = j.at("svm");
      const std::string scheme = js.at("scheme").get<std::string>();
      if (scheme == "ovo") {
        svm.scheme = VoteScheme::kOneVsOne;
      } else if (scheme == "ovr") {
        svm.scheme = VoteScheme::kOneVsRest;
      } else {
        throw Error(ErrorCode::kParse, "unknown svm scheme '" + scheme + "'");
      }
      for (const auto& jh : js.at("hyperplanes")) {
        Hyperplane hp;
        hp.weights = jh.at("weights").get<std::vector<double>>();
        hp.bias = jh.at("bias").get<double>();
        const auto classes_of = jh.at("classes").get<std::vector<int>>();
        if (classes_of.empty() || classes_of.size() > 2) {
          throw Error(ErrorCode::kParse, "hyperplane 'classes' must list 1 or 2 classes");
        }
        hp.class_a = classes_of[0];
        if (classes_of.size() == 2) hp.class_b = classes_of[1];
        svm.hyperplanes.push_back(std::move(hp));
      }
      model.body = std::move(svm);
    } else {
      throw Error(ErrorCode::kParse, "unknown model_type '" + type + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("model file: ") + e.what());
  }
  validate_model(model);
  return model;
}

ModelSpec load_model(const std::filesystem::path& path) {
  return parse_model(detail::read_file(path));
}

std::string serialize_model(const ModelSpec& model) {
  json j;
  j["format_version"] = kFormatVersion;
  j["model_type"] = std::string(to_string(model.kind()));
  if (!model.name.empty()) j["name"] = model.name;
  j["class_count"] = model.class_count();
  j["quantization"] = {{"feature_count", model.quant.feature_count},
                       {"value_bits", model.quant.value_bits},
                       {"scale_shift", model.quant.scale_shift},
                       {"acc_bits", model.quant.acc_bits},
                       {"mul_index_bits", model.quant.mul_index_bits}};
  if (const auto* dt = std::get_if<DecisionTreeModel>(&model.body)) {
    j["tree"] = tree_to_json(*dt);
  } else if (const auto* rf = std::get_if<RandomForestModel>(&model.body)) {
    json trees = json::array();
    for (const auto& t : rf->trees) trees.push_back(tree_to_json(t));
    j["trees"] = std::move(trees);
  } else {
    const auto& svm = std::get<SvmModel>(model.body);
    json hps = json::array();
    for (const auto& hp : svm.hyperplanes) {
      json classes = json::array({hp.class_a});
      if (svm.scheme == VoteScheme::kOneVsOne) classes.push_back(hp.class_b);
      hps.push_back({{"weights", hp.weights}, {"bias", hp.bias}, {"classes", classes}});
    }
    j["svm"] = {{"scheme", svm.scheme == VoteScheme::kOneVsOne ? "ovo" : "ovr"},
                {"hyperplanes", std::move(hps)}};
  }
  return j.dump(1) + "\n";
}

void save_model(const ModelSpec& model, const std::filesystem::path& path) {
  detail::write_file(path, serialize_model(model));
}

// ---------------------------------------------------------------------------
// Reference semantics

std::vector<int> tree_path(const DecisionTreeModel& tree, std::span<const FeatureValue> features) {
  std::vector<int> visited;
  int id = tree.root;
  while (true) {
    visited.push_back(id);
    const TreeNode& n = tree.node(id);
    if (n.leaf) return visited;
    const auto value = static_cast<std::int64_t>(features[static_cast<std::size_t>(n.feature)]);
    id = value <= n.threshold ? n.left : n.right;
  }
}

ClassId predict_tree(const DecisionTreeModel& tree, std::span<const FeatureValue> features) {
  int id = tree.root;
  while (true) {
    const TreeNode& n = tree.node(id);
    if (n.leaf) return n.label;
    const auto value = static_cast<std::int64_t>(features[static_cast<std::size_t>(n.feature)]);
    id = value <= n.threshold ? n.left : n.right;
  }
}

ClassId majority_vote(std::span<const ClassId> votes, int class_count) {
  std::vector<int> counts(static_cast<std::size_t>(class_count), 0);
  for (ClassId v : votes) ++counts.at(static_cast<std::size_t>(v));
  return static_cast<ClassId>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

FeatureValue svm_index(FeatureValue q, const QuantizationSpec& quant) {
  return q >> quant.svm_index_shift();
}

std::int64_t wrap_signed(std::int64_t value, int bits) {
  if (bits >= 64) return value;
  const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
  std::uint64_t u = static_cast<std::uint64_t>(value) & mask;
  if (u & (std::uint64_t{1} << (bits - 1))) u |= ~mask;
  return static_cast<std::int64_t>(u);
}

std::int64_t fixed_bias(double bias, const QuantizationSpec& quant) {
  return std::llround(std::ldexp(bias, quant.scale_shift));
}

std::int64_t fixed_product(double weight, FeatureValue index, const QuantizationSpec& quant) {
  // w * (idx / 2^b) * 2^s
  return std::llround(weight * std::ldexp(static_cast<double>(index),
                                          quant.scale_shift - quant.svm_index_bits()));
}

std::vector<std::int64_t> svm_accumulators(const SvmModel& svm, const QuantizationSpec& quant,
                                           std::span<const FeatureValue> features) {
  std::vector<std::int64_t> acc;
  acc.reserve(svm.hyperplanes.size());
  for (const auto& hp : svm.hyperplanes) {
    std::int64_t sum = wrap_signed(fixed_bias(hp.bias, quant), quant.acc_bits);
    for (std::size_t i = 0; i < hp.weights.size(); ++i) {
      const auto product = fixed_product(hp.weights[i], svm_index(features[i], quant), quant);
      sum = wrap_signed(sum + product, quant.acc_bits);
    }
    acc.push_back(sum);
  }
  return acc;
}

std::uint32_t svm_sign_bits(std::span<const std::int64_t> accumulators) {
  std::uint32_t bits = 0;
  for (std::size_t h = 0; h < accumulators.size(); ++h) {
    if (accumulators[h] < 0) bits |= 1u << h;
  }
  return bits;
}

ClassId svm_vote(const SvmModel& svm, std::uint32_t sign_bits) {
  std::vector<ClassId> votes;
  for (std::size_t h = 0; h < svm.hyperplanes.size(); ++h) {
    const bool negative = (sign_bits >> h) & 1u;
    const auto& hp = svm.hyperplanes[h];
    if (svm.scheme == VoteScheme::kOneVsOne) {
      votes.push_back(negative ? hp.class_b : hp.class_a);
    } else if (!negative) {
      votes.push_back(hp.class_a);
    }
  }
  return majority_vote(votes, svm.class_count);
}

ClassId reference_predict(const ModelSpec& model, std::span<const FeatureValue> features) {
  if (const auto* dt = std::get_if<DecisionTreeModel>(&model.body)) {
    return predict_tree(*dt, features);
  }
  if (const auto* rf = std::get_if<RandomForestModel>(&model.body)) {
    std::vector<ClassId> votes;
    votes.reserve(rf->trees.size());
    for (const auto& t : rf->trees) votes.push_back(predict_tree(t, features));
    return majority_vote(votes, rf->class_count);
  }
  const auto& svm = std::get<SvmModel>(model.body);
  const auto acc = svm_accumulators(svm, model.quant, features);
  return svm_vote(svm, svm_sign_bits(acc));
}

ClassId float_predict(const ModelSpec& model, std::span<const FeatureValue> features) {
  const auto* svm = std::get_if<SvmModel>(&model.body);
  if (svm == nullptr) return reference_predict(model, features);
  std::uint32_t bits = 0;
  for (std::size_t h = 0; h < svm->hyperplanes.size(); ++h) {
    const auto& hp = svm->hyperplanes[h];
    double score = hp.bias;
    for (std::size_t i = 0; i < hp.weights.size(); ++i) {
      score += hp.weights[i] * std::ldexp(static_cast<double>(features[i]), -model.quant.value_bits);
    }
    if (score < 0) bits |= 1u << h;
  }
  return svm_vote(*svm, bits);
}

// ---------------------------------------------------------------------------
// Datasets

Dataset load_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParse, "cannot open dataset " + path.string());
  Dataset data;
  data.name = path.stem().string();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && !std::isdigit(static_cast<unsigned char>(line.front()))) continue;
    std::vector<long long> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stoll(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line_no) +
                                           ": not an integer: '" + cell + "'");
      }
    }
    if (values.size() < 2) {
      throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line_no) +
                                         ": need at least one feature and a label");
    }
    const int features = static_cast<int>(values.size()) - 1;
    if (data.feature_count == 0) data.feature_count = features;
    if (features != data.feature_count) {
      throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line_no) +
                                         ": inconsistent column count");
    }
    Sample s;
    for (int i = 0; i < features; ++i) {
      if (values[static_cast<std::size_t>(i)] < 0 || values[static_cast<std::size_t>(i)] > 0xFFFFFFFFll) {
        throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line_no) +
                                           ": feature out of range");
      }
      s.features.push_back(static_cast<FeatureValue>(values[static_cast<std::size_t>(i)]));
    }
    s.label = static_cast<ClassId>(values.back());
    data.rows.push_back(std::move(s));
  }
  return data;
}

void save_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ostringstream out;
  for (int i = 0; i < data.feature_count; ++i) out << 'f' << i << ',';
  out << "label\n";
  for (const auto& row : data.rows) {
    for (auto v : row.features) out << v << ',';
    out << row.label << '\n';
  }
  detail::write_file(path, out.str());
}

void validate_dataset(const Dataset& data, const QuantizationSpec& quant, int class_count) {
  if (data.feature_count != quant.feature_count) {
    throw Error(ErrorCode::kInvalidArgument,
                "dataset has " + std::to_string(data.feature_count) + " features, model expects " +
                    std::to_string(quant.feature_count));
  }
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    const auto& row = data.rows[r];
    for (auto v : row.features) {
      if (v > quant.max_value()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "dataset row " + std::to_string(r) + ": feature exceeds value_bits");
      }
    }
    if (row.label < 0 || row.label >= class_count) {
      throw Error(ErrorCode::kInvalidArgument,
                  "dataset row " + std::to_string(r) + ": label out of range");
    }
  }
}

MinMaxScaler MinMaxScaler::fit(const std::vector<std::vector<double>>& train_rows) {
  if (train_rows.empty()) throw Error(ErrorCode::kInvalidArgument, "scaler: empty training split");
  MinMaxScaler s;
  s.min = train_rows.front();
  s.max = train_rows.front();
  for (const auto& row : train_rows) {
    if (row.size() != s.min.size()) throw Error(ErrorCode::kInvalidArgument, "scaler: ragged rows");
    for (std::size_t i = 0; i < row.size(); ++i) {
      s.min[i] = std::min(s.min[i], row[i]);
      s.max[i] = std::max(s.max[i], row[i]);
    }
  }
  for (std::size_t i = 0; i < s.min.size(); ++i) {
    if (!(s.min[i] < s.max[i])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "scaler: feature " + std::to_string(i) + " is constant on the training split");
    }
  }
  return s;
}

FeatureVector MinMaxScaler::transform(std::span<const double> row, int value_bits) const {
  const double top = std::ldexp(1.0, value_bits) - 1.0;
  FeatureVector out(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) {
    const double scaled = std::floor((row[i] - min[i]) / (max[i] - min[i]) * top);
    out[i] = static_cast<FeatureValue>(std::clamp(scaled, 0.0, top));
  }
  return out;
}

Dataset quantize_dataset(const std::vector<std::vector<double>>& rows,
                         const std::vector<ClassId>& labels, const MinMaxScaler& scaler,
                         const QuantizationSpec& quant, std::string name) {
  if (rows.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "quantize_dataset: rows and labels differ in length");
  }
  Dataset data;
  data.name = std::move(name);
  data.feature_count = static_cast<int>(scaler.min.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != scaler.min.size()) {
      throw Error(ErrorCode::kInvalidArgument, "quantize_dataset: row " + std::to_string(r) +
                                                   " has wrong feature count");
    }
    data.rows.push_back({scaler.transform(rows[r], quant.value_bits), labels[r]});
  }
  return data;
}

}  // namespace innet
