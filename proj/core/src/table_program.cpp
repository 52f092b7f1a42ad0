// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#include "innet/table_program.hpp"

#include <charconv>
#include <map>
#include <sstream>

#include "innet/error.hpp"
#include "json_util.hpp"

namespace innet {

using nlohmann::json;

std::string_view to_string(TableKind kind) {
  switch (kind) {
    case TableKind::kDtLayer: return "dt_layer";
    case TableKind::kDtPredict: return "dt_predict";
    case TableKind::kMultitreeVoting: return "multitree_voting";
    case TableKind::kSvmMul: return "svm_mul";
    case TableKind::kSvmPredict: return "svm_predict";
  }
  return "?";
}

std::string_view to_string(ResourceClass rc) {
  return rc == ResourceClass::kTcam ? "tcam" : "sram";
}

TableKind table_kind_from_string(std::string_view name) {
  for (auto k : {TableKind::kDtLayer, TableKind::kDtPredict, TableKind::kMultitreeVoting,
                 TableKind::kSvmMul, TableKind::kSvmPredict}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::kUnknownTable, "unknown table kind '" + std::string(name) + "'");
}

ResourceClass resource_of(TableKind kind) {
  return kind == TableKind::kDtLayer ? ResourceClass::kTcam : ResourceClass::kSram;
}

std::size_t TableProgram::entry_count() const {
  std::size_t n = 0;
  for (const auto& s : stages) {
    for (const auto& t : s.tables) n += t.entries.size();
  }
  return n;
}

// ---------------------------------------------------------------------------
// FieldRef

std::string FieldRef::to_string() const {
  switch (kind) {
    case Kind::kCode: return "code" + std::to_string(index);
    case Kind::kFeatureReg: return "f" + std::to_string(index);
    case Kind::kFeature: {
      std::string s = "feature[" + std::to_string(index) + "]";
      if (shift > 0) s += ">>" + std::to_string(shift);
      return s;
    }
    case Kind::kSlot: return "slot[" + std::to_string(index) + "]";
    case Kind::kSvmCode: return "svm_code";
  }
  return "?";
}

namespace {

int parse_int(std::string_view text, std::string_view whole) {
  int v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || v < 0) {
    throw Error(ErrorCode::kParse, "bad field reference '" + std::string(whole) + "'");
  }
  return v;
}

// "name[idx]" -> idx, with optional ">>shift" suffix.
std::pair<int, int> parse_indexed(std::string_view rest, std::string_view whole) {
  if (rest.empty() || rest.front() != '[') {
    throw Error(ErrorCode::kParse, "bad field reference '" + std::string(whole) + "'");
  }
  const auto close = rest.find(']');
  if (close == std::string_view::npos) {
    throw Error(ErrorCode::kParse, "bad field reference '" + std::string(whole) + "'");
  }
  const int index = parse_int(rest.substr(1, close - 1), whole);
  auto tail = rest.substr(close + 1);
  int shift = 0;
  if (!tail.empty()) {
    if (tail.substr(0, 2) != ">>") {
      throw Error(ErrorCode::kParse, "bad field reference '" + std::string(whole) + "'");
    }
    shift = parse_int(tail.substr(2), whole);
  }
  return {index, shift};
}

}  // namespace

FieldRef FieldRef::parse(std::string_view text) {
  FieldRef f;
  if (text == "svm_code") {
    f.kind = Kind::kSvmCode;
  } else if (text.starts_with("code")) {
    f.kind = Kind::kCode;
    f.index = parse_int(text.substr(4), text);
  } else if (text.starts_with("feature")) {
    f.kind = Kind::kFeature;
    std::tie(f.index, f.shift) = parse_indexed(text.substr(7), text);
  } else if (text.starts_with("slot")) {
    f.kind = Kind::kSlot;
    auto [index, shift] = parse_indexed(text.substr(4), text);
    if (shift != 0) throw Error(ErrorCode::kParse, "slot fields cannot be shifted");
    f.index = index;
  } else if (text.starts_with("f")) {
    f.kind = Kind::kFeatureReg;
    f.index = parse_int(text.substr(1), text);
  } else {
    throw Error(ErrorCode::kParse, "unknown field '" + std::string(text) + "'");
  }
  if ((f.kind == Kind::kCode || f.kind == Kind::kFeatureReg) && f.index > 1) {
    throw Error(ErrorCode::kParse, "register index out of range in '" + std::string(text) + "'");
  }
  return f;
}

// ---------------------------------------------------------------------------
// JSON mapping

namespace {

constexpr int kFormatVersion = 1;

json load_to_json(const std::optional<LoadFeature>& load) {
  if (!load) return nullptr;
  return {{"reg", load->reg}, {"feature", load->feature}};
}

std::optional<LoadFeature> load_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return LoadFeature{j.at("reg").get<int>(), j.at("feature").get<int>()};
}

json tree_init_to_json(const TreeInit& init) { return {{"root", load_to_json(init.root)}}; }

TreeInit tree_init_from_json(const json& j) {
  return TreeInit{j.contains("root") ? load_from_json(j.at("root")) : std::nullopt};
}

json action_to_json(const Action& action) {
  return std::visit(
      [](const auto& a) -> json {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, NoOp>) {
          return {{"op", "noop"}};
        } else if constexpr (std::is_same_v<T, WriteCode>) {
          json j = {{"op", "write_code"}, {"reg", a.reg}, {"value", a.value}};
          if (a.load) j["load"] = load_to_json(a.load);
          return j;
        } else if constexpr (std::is_same_v<T, SetDtResult>) {
          json j = {{"op", "set_dt_result"}, {"slot", a.slot}, {"class", a.cls}};
          if (a.reinit) j["reinit"] = tree_init_to_json(*a.reinit);
          return j;
        } else if constexpr (std::is_same_v<T, SetVote>) {
          return {{"op", "set_vote"}, {"class", a.cls}};
        } else if constexpr (std::is_same_v<T, AddProduct>) {
          return {{"op", "add_product"}, {"hyperplane", a.hyperplane}, {"product", a.product}};
        } else {
          return {{"op", "set_svm_result"}, {"class", a.cls}};
        }
      },
      action);
}

Action action_from_json(const json& j) {
  const std::string op = j.at("op").get<std::string>();
  if (op == "noop") return NoOp{};
  if (op == "write_code") {
    WriteCode a;
    a.reg = j.at("reg").get<int>();
    a.value = j.at("value").get<std::uint64_t>();
    if (j.contains("load")) a.load = load_from_json(j.at("load"));
    return a;
  }
  if (op == "set_dt_result") {
    SetDtResult a;
    a.slot = j.at("slot").get<int>();
    a.cls = j.at("class").get<int>();
    if (j.contains("reinit")) a.reinit = tree_init_from_json(j.at("reinit"));
    return a;
  }
  if (op == "set_vote") return SetVote{j.at("class").get<int>()};
  if (op == "add_product") {
    return AddProduct{j.at("hyperplane").get<int>(), j.at("product").get<std::int64_t>()};
  }
  if (op == "set_svm_result") return SetSvmResult{j.at("class").get<int>()};
  throw Error(ErrorCode::kParse, "unknown action op '" + op + "'");
}

std::string_view kind_name(IntermediateKind k) {
  switch (k) {
    case IntermediateKind::kNone: return "none";
    case IntermediateKind::kTree: return "tree";
    case IntermediateKind::kSvm: return "svm";
  }
  return "none";
}

IntermediateKind intermediate_kind_from(const std::string& s) {
  if (s == "none") return IntermediateKind::kNone;
  if (s == "tree") return IntermediateKind::kTree;
  if (s == "svm") return IntermediateKind::kSvm;
  throw Error(ErrorCode::kParse, "unknown intermediates kind '" + s + "'");
}

ModelKind model_kind_from(const std::string& s) {
  if (s == "dt") return ModelKind::kDecisionTree;
  if (s == "rf") return ModelKind::kRandomForest;
  if (s == "svm") return ModelKind::kSvm;
  throw Error(ErrorCode::kParse, "unknown model_type '" + s + "'");
}

json key_to_json(const MatchKey& k) {
  json j = {{"field", k.field.to_string()}, {"value", k.key.value}, {"width", k.key.width}};
  if (!k.key.is_exact()) j["mask"] = k.key.mask;
  return j;
}

MatchKey key_from_json(const json& j) {
  MatchKey k;
  k.field = FieldRef::parse(j.at("field").get<std::string>());
  k.key.width = j.at("width").get<int>();
  if (k.key.width < 1 || k.key.width > 64) throw Error(ErrorCode::kParse, "key width out of range");
  k.key.value = j.at("value").get<std::uint64_t>();
  k.key.mask = j.contains("mask") ? j.at("mask").get<std::uint64_t>() : width_mask(k.key.width);
  return k;
}

}  // namespace

std::string serialize_program(const TableProgram& program) {
  const ProgramInfo& info = program.info;
  json header;
  header["format_version"] = kFormatVersion;
  header["program"] = {
      {"mid", info.mid},
      {"vid", info.vid},
      {"model_type", std::string(to_string(info.kind))},
      {"class_count", info.class_count},
      {"feature_count", info.feature_count},
      {"code_bits", info.code_bits},
      {"feature_boundary", info.feature_boundary},
      {"tree_count", info.tree_count},
      {"hyperplane_count", info.hyperplane_count},
      {"tree_depths", info.tree_depths},
      {"layout",
       {{"feature_count", info.layout.feature_count},
        {"value_bits", info.layout.value_bits},
        {"intermediates", std::string(kind_name(info.layout.kind))},
        {"code_bits", info.layout.code_bits},
        {"tree_slots", info.layout.tree_slots},
        {"slot_bits", info.layout.slot_bits},
        {"hyperplanes", info.layout.hyperplanes},
        {"acc_bits", info.layout.acc_bits}}}};
  if (program.init) {
    json init = {{"accumulators", program.init->accumulators}};
    if (program.init->tree) init["tree"] = tree_init_to_json(*program.init->tree);
    header["init"] = std::move(init);
  }
  if (program.final_stage) header["final_stage"] = *program.final_stage;
  json stages = json::array();
  for (const auto& s : program.stages) {
    json tables = json::array();
    for (const auto& t : s.tables) {
      tables.push_back({{"table", std::string(to_string(t.kind))},
                        {"slot", t.slot},
                        {"entries", t.entries.size()}});
    }
    stages.push_back({{"index", s.index}, {"segment", s.segment}, {"group", s.group},
                      {"tables", std::move(tables)}});
  }
  header["stages"] = std::move(stages);

  // Header keys first, then one entry record per line.
  std::string text = header.dump();
  text.pop_back();  // drop closing brace
  text += ",\"entries\":[";
  bool first = true;
  for (const auto& s : program.stages) {
    for (const auto& t : s.tables) {
      for (const auto& e : t.entries) {
        json keys = json::array();
        for (const auto& k : e.keys) keys.push_back(key_to_json(k));
        json rec = {{"stage", s.index},
                    {"table", std::string(to_string(t.kind))},
                    {"slot", t.slot},
                    {"keys", std::move(keys)},
                    {"priority", e.priority},
                    {"action", action_to_json(e.action)}};
        text += first ? "\n" : ",\n";
        text += rec.dump();
        first = false;
      }
    }
  }
  text += "\n]}\n";
  return text;
}

TableProgram parse_program(std::string_view text) {
  TableProgram program;
  try {
    const json j = json::parse(text);
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw Error(ErrorCode::kParse, "unsupported entries file format_version");
    }
    const json& p = j.at("program");
    ProgramInfo& info = program.info;
    info.mid = p.at("mid").get<int>();
    info.vid = p.at("vid").get<int>();
    info.kind = model_kind_from(p.at("model_type").get<std::string>());
    info.class_count = p.at("class_count").get<int>();
    info.feature_count = p.at("feature_count").get<int>();
    info.code_bits = p.at("code_bits").get<int>();
    info.feature_boundary = p.at("feature_boundary").get<int>();
    info.tree_count = p.at("tree_count").get<int>();
    info.hyperplane_count = p.at("hyperplane_count").get<int>();
    info.tree_depths = p.at("tree_depths").get<std::vector<int>>();
    const json& l = p.at("layout");
    info.layout.feature_count = l.at("feature_count").get<int>();
    info.layout.value_bits = l.at("value_bits").get<int>();
    info.layout.kind = intermediate_kind_from(l.at("intermediates").get<std::string>());
    info.layout.code_bits = l.at("code_bits").get<int>();
    info.layout.tree_slots = l.at("tree_slots").get<int>();
    info.layout.slot_bits = l.at("slot_bits").get<int>();
    info.layout.hyperplanes = l.at("hyperplanes").get<int>();
    info.layout.acc_bits = l.at("acc_bits").get<int>();
    if (j.contains("init")) {
      InitAction init;
      init.accumulators = j.at("init").value("accumulators", std::vector<std::int64_t>{});
      if (j.at("init").contains("tree")) init.tree = tree_init_from_json(j.at("init").at("tree"));
      program.init = std::move(init);
    }
    if (j.contains("final_stage")) program.final_stage = j.at("final_stage").get<int>();

    std::map<std::tuple<int, TableKind, int>, std::pair<TableInstance*, std::size_t>> tables;
    for (const auto& js : j.at("stages")) {
      ProgramStage s;
      s.index = js.at("index").get<int>();
      s.segment = js.value("segment", 0);
      s.group = js.value("group", -1);
      for (const auto& jt : js.at("tables")) {
        TableInstance t;
        t.kind = table_kind_from_string(jt.at("table").get<std::string>());
        t.slot = jt.at("slot").get<int>();
        s.tables.push_back(std::move(t));
      }
      program.stages.push_back(std::move(s));
    }
    // Pointers are stable now that `stages` is fully built.
    std::size_t si = 0;
    for (const auto& js : j.at("stages")) {
      auto& s = program.stages[si++];
      std::size_t ti = 0;
      for (const auto& jt : js.at("tables")) {
        auto& t = s.tables[ti++];
        const auto key = std::make_tuple(s.index, t.kind, t.slot);
        if (tables.count(key)) {
          throw Error(ErrorCode::kParse, "duplicate table declaration in stage " + std::to_string(s.index));
        }
        tables[key] = {&t, jt.at("entries").get<std::size_t>()};
      }
    }
    for (const auto& je : j.at("entries")) {
      const auto key = std::make_tuple(je.at("stage").get<int>(),
                                       table_kind_from_string(je.at("table").get<std::string>()),
                                       je.at("slot").get<int>());
      auto it = tables.find(key);
      if (it == tables.end()) {
        throw Error(ErrorCode::kUnknownTable,
                    "entry targets undeclared table " + je.at("table").get<std::string>() +
                        " in stage " + std::to_string(std::get<0>(key)));
      }
      TableEntry e;
      for (const auto& jk : je.at("keys")) e.keys.push_back(key_from_json(jk));
      e.priority = je.at("priority").get<std::uint32_t>();
      e.action = action_from_json(je.at("action"));
      it->second.first->entries.push_back(std::move(e));
    }
    for (const auto& [key, value] : tables) {
      if (value.first->entries.size() != value.second) {
        throw Error(ErrorCode::kParse, "entry count mismatch for " +
                                           std::string(to_string(std::get<1>(key))) + " in stage " +
                                           std::to_string(std::get<0>(key)));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("entries file: ") + e.what());
  }
  return program;
}

TableProgram load_program(const std::filesystem::path& path) {
  return parse_program(detail::read_file(path));
}

void save_program(const TableProgram& program, const std::filesystem::path& path) {
  detail::write_file(path, serialize_program(program));
}

}  // namespace innet
