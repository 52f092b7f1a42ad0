// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#include "innet/orchestrator.hpp"

#include <chrono>
#include <random>
#include <sstream>

#include "innet/error.hpp"
#include "json_util.hpp"

namespace innet {
namespace {

int resolve_dst(const NetworkModel& net, int dst) {
  if (net.hosts.empty()) throw Error(ErrorCode::kInvalidArgument, "topology has no hosts");
  return dst < 0 ? static_cast<int>(net.hosts.size()) - 1 : dst;
}

template <typename F>
auto phase(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(name) + ": " + e.what());
  }
}

}  // namespace

PlannerProblem make_problem(const TableProgram& program, const NetworkModel& net, const RunConfig& cfg) {
  PlannerProblem pb;
  pb.shape = ProgramShape::of(program);
  pb.paths = enumerate_paths(net, cfg.src_host, resolve_dst(net, cfg.dst_host), cfg.paths);
  pb.capacity = CapacityView(net);
  pb.cost = CostModel::for_layout(program.info.layout, cfg.bandwidth);
  pb.weights = cfg.weights;
  pb.threads = cfg.planner_threads;
  return pb;
}

DeploymentPlan plan_program(const TableProgram& program, const NetworkModel& net, const RunConfig& cfg) {
  const PlannerProblem pb = make_problem(program, net, cfg);
  if (pb.shape.segment_count() <= 1) return solve(pb);
  return merge_plans(plan_multi(pb), pb);
}

std::map<int, TableProgram> slice_program(const TableProgram& program, const DeploymentPlan& plan) {
  if (plan.placements.size() != program.stages.size()) {
    throw Error(ErrorCode::kInvalidArgument, "plan places " + std::to_string(plan.placements.size()) +
                                                 " stages, program has " +
                                                 std::to_string(program.stages.size()));
  }
  std::map<int, TableProgram> bundles;
  for (std::size_t i = 0; i < program.stages.size(); ++i) {
    const Placement& pl = plan.placements[i];
    auto [it, inserted] = bundles.try_emplace(pl.device);
    TableProgram& b = it->second;
    if (inserted) b.info = program.info;
    ProgramStage s = program.stages[i];
    s.index = pl.stage;
    b.stages.push_back(std::move(s));
  }
  if (!program.stages.empty()) {
    bundles[plan.placements.front().device].init = program.init;
    bundles[plan.placements.back().device].final_stage = plan.placements.back().stage;
  }
  return bundles;
}

void deploy(Network& network, const TableProgram& program, const DeploymentPlan& plan, int rid, int dst_host) {
  network.registry().add(program.info);
  for (const auto& [device, bundle] : slice_program(program, plan)) network.device(device).install(bundle);
  network.install_route(rid, plan.path, dst_host);
}

InferenceResult infer(const Network& network, const ProgramInfo& info, const Dataset& data, int src_host,
                      int rid) {
  InferenceResult r;
  r.labels.assign(data.rows.size(), -1);
  double devices = 0;
  double bytes = 0;
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    Packet p;
    p.header.packet_id = static_cast<std::uint16_t>(i % 4096);
    p.header.type = PacketType::kRequest;
    p.header.mid = static_cast<std::uint8_t>(info.mid);
    p.header.vid = static_cast<std::uint8_t>(info.vid);
    p.header.rid = static_cast<std::uint8_t>(rid);
    p.features = data.rows[i].features;
    p.intermediates = empty_intermediates(info.layout);
    Frame f{EtherType::kInference, 0, encode(p, info.layout)};
    const Delivery d = network.send(src_host, f);
    const Header h = decode_header(d.frame.payload);
    if (h.type != PacketType::kResponse) {
      throw Error(ErrorCode::kInvariant, "row " + std::to_string(i) + " reached the host without a result");
    }
    if (h.packet_id != p.header.packet_id) {
      throw Error(ErrorCode::kInvariant, "response id " + std::to_string(h.packet_id) + " does not match row " +
                                             std::to_string(i));
    }
    r.labels[i] = h.rslt;
    devices += static_cast<double>(d.devices.size());
    bytes += static_cast<double>(d.wire_bytes);
  }
  if (!data.rows.empty()) {
    r.mean_devices = devices / static_cast<double>(data.rows.size());
    r.mean_wire_bytes = bytes / static_cast<double>(data.rows.size());
  }
  return r;
}

RunReport run_pipeline(const ModelSpec& model, const NetworkModel& net, const Dataset& data, const RunConfig& cfg) {
  RunReport report;
  report.model_name = model.name;
  report.kind = model.kind();
  phase("load", [&] { validate_dataset(data, model.quant, model.class_count()); });
  const TableProgram program = phase("translate", [&] { return translate(model, cfg.translator); });
  report.resources = count_resources(program);
  report.plan = phase("plan", [&] { return plan_program(program, net, cfg); });

  Network network(net);
  const int dst = resolve_dst(net, cfg.dst_host);
  phase("deploy", [&] {
    deploy(network, program, report.plan, cfg.rid, dst);
    for (int d : report.plan.path) {
      report.installs.push_back(DeviceInstall{d, network.device(d).query_resources()});
    }
  });

  const InferenceResult r = phase("infer", [&] { return infer(network, program.info, data, cfg.src_host, cfg.rid); });
  report.rows = data.rows.size();
  report.pipeline = r.labels;
  report.mean_devices = r.mean_devices;
  report.mean_wire_bytes = r.mean_wire_bytes;
  phase("score", [&] {
    std::vector<ClassId> truth;
    for (const auto& row : data.rows) {
      report.oracle.push_back(reference_predict(model, row.features));
      truth.push_back(row.label);
    }
    if (!data.rows.empty()) {
      report.kappa_vs_oracle = cohens_kappa(report.pipeline, report.oracle);
      report.agreement_vs_oracle = score(report.pipeline, report.oracle).accuracy;
      report.vs_truth = score(report.pipeline, truth);
    }
  });
  return report;
}

RunReport run_pipeline(const std::filesystem::path& model, const std::filesystem::path& topology,
                       const std::filesystem::path& dataset, const RunConfig& cfg) {
  const ModelSpec m = phase("load", [&] { return load_model(model); });
  const NetworkModel net = phase("load", [&] { return load_topology(topology); });
  const Dataset data = phase("load", [&] { return load_dataset_csv(dataset); });
  return run_pipeline(m, net, data, cfg);
}

std::string serialize_report(const RunReport& report) {
  using nlohmann::json;
  json j;
  j["model"] = report.model_name;
  j["model_type"] = std::string(to_string(report.kind));
  j["rows"] = report.rows;
  j["metrics"] = {{"kappa_vs_oracle", report.kappa_vs_oracle},
                  {"agreement_vs_oracle", report.agreement_vs_oracle},
                  {"accuracy", report.vs_truth.accuracy},
                  {"macro_f1", report.vs_truth.macro_f1}};
  j["traffic"] = {{"mean_devices", report.mean_devices}, {"mean_wire_bytes", report.mean_wire_bytes}};
  j["resources"] = {{"stages", report.resources.total_stages},
                    {"tcam", report.resources.total_tcam},
                    {"sram", report.resources.total_sram},
                    {"mean_tree_depth", report.resources.mean_tree_depth}};
  j["plan"] = json::parse(serialize_plan(report.plan));
  json installs = json::array();
  for (const auto& d : report.installs) {
    json tables = json::array();
    for (const auto& t : d.usage.tables) {
      tables.push_back({{"stage", t.stage},
                        {"table", std::string(to_string(t.kind))},
                        {"slot", t.slot},
                        {"entries", t.entries}});
    }
    installs.push_back({{"device", d.device},
                        {"tcam", d.usage.tcam},
                        {"sram", d.usage.sram},
                        {"free_stages", d.usage.free_stages},
                        {"tables", std::move(tables)}});
  }
  j["installs"] = std::move(installs);
  return j.dump(1) + "\n";
}

// ---------------------------------------------------------------------------
// Planner benchmark

std::vector<BenchCase> default_bench_cases() {
  const std::vector<BenchCase> topologies = {
      {TopologyKind::kFatTree, 12, 0, 0},   {TopologyKind::kFatTree, 16, 0, 0},
      {TopologyKind::kFatTree, 20, 0, 0},   {TopologyKind::kDCell, 3, 2, 0},
      {TopologyKind::kDCell, 4, 2, 0},      {TopologyKind::kDCell, 5, 2, 0},
      {TopologyKind::kBCube, 5, 2, 0},      {TopologyKind::kBCube, 7, 2, 0},
      {TopologyKind::kBCube, 8, 2, 0},      {TopologyKind::kJellyfish, 80, 3, 0},
      {TopologyKind::kJellyfish, 125, 4, 0}, {TopologyKind::kJellyfish, 170, 3, 0},
  };
  std::vector<BenchCase> cases;
  for (const auto& t : topologies) {
    for (int stages : {5, 10, 15, 20}) {
      BenchCase c = t;
      c.program_stages = stages;
      cases.push_back(c);
    }
  }
  return cases;
}

std::vector<BenchResult> bench_planner(const std::vector<BenchCase>& cases, std::uint64_t seed,
                                       const RunConfig& cfg) {
  std::vector<BenchResult> out;
  std::mt19937_64 rng(seed);
  for (const auto& c : cases) {
    BenchResult r;
    r.spec = c;
    std::ostringstream label;
    label << to_string(c.kind) << "(" << c.a;
    if (c.kind != TopologyKind::kFatTree && c.kind != TopologyKind::kLine) label << "," << c.b;
    label << ")";
    r.label = label.str();

    const NetworkModel net = generate(c.kind, c.a, c.b, seed);
    r.devices = static_cast<int>(net.devices.size());

    TableProgram program;
    program.info.layout.feature_count = 16;
    program.info.layout.kind = IntermediateKind::kTree;
    program.info.layout.tree_slots = 1;
    std::uniform_int_distribution<std::size_t> entries(16, 512);
    for (int s = 0; s < c.program_stages; ++s) {
      ProgramStage stage;
      stage.index = s;
      for (int slot = 0; slot < 2; ++slot) {
        TableInstance t{TableKind::kDtLayer, slot, {}};
        t.entries.resize(entries(rng));
        stage.tables.push_back(std::move(t));
      }
      program.stages.push_back(std::move(stage));
    }

    const auto start = std::chrono::steady_clock::now();
    PlannerProblem pb = make_problem(program, net, cfg);
    std::uniform_real_distribution<double> fill(0.0, 0.9);
    for (const auto& d : net.devices) {
      if (!d.config.programmable) continue;
      for (int j = 0; j < d.config.stage_count; ++j) {
        for (int slot = 0; slot < 2; ++slot) {
          const auto used = static_cast<std::size_t>(fill(rng) * static_cast<double>(d.config.tcam_capacity));
          pb.capacity.add_usage(d.id, j, TableKind::kDtLayer, slot, used);
        }
      }
    }
    r.paths = pb.paths.size();
    try {
      const DeploymentPlan plan = solve(pb);
      r.feasible = true;
      r.objective = plan.objective.total;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasible) throw;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(r);
  }
  return out;
}

std::string format_bench(const std::vector<BenchResult>& results) {
  std::ostringstream os;
  os << "topology\tdevices\tprogram_stages\tpaths\tfeasible\tobjective\tseconds\n";
  for (const auto& r : results) {
    os << r.label << '\t' << r.devices << '\t' << r.spec.program_stages << '\t' << r.paths << '\t'
       << (r.feasible ? 1 : 0) << '\t' << r.objective << '\t' << r.seconds << '\n';
  }
  return os.str();
}

}  // namespace innet
