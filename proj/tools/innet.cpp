// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: translate, plan, deploy, infer, eval, topo-gen and
// bench. Every artifact is read and written in the documented file formats.

#include <fstream>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "innet/error.hpp"
#include "innet/orchestrator.hpp"

namespace {

using namespace innet;

struct Options {
  std::string model;
  std::string entries;
  std::string topology;
  std::string plan;
  std::string data;
  std::string out;
  std::string report;
  RunConfig run;
  // topo-gen
  std::string kind = "fat_tree";
  int a = 4;
  int b = 0;
  std::uint64_t seed = 1;
  DeviceConfig device;
  // bench
  bool quick = false;
};

void add_translator_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--code-bits", o.run.translator.code_bits, "Status register width")->capture_default_str();
  cmd->add_option("--mid", o.run.translator.mid, "Model id (4 bits)")->capture_default_str();
  cmd->add_option("--vid", o.run.translator.vid, "Version id (4 bits)")->capture_default_str();
  cmd->add_option("--mul-slots", o.run.translator.mul_slots, "svm_mul tables per stage")->capture_default_str();
  cmd->add_option("--tree-budget", o.run.translator.tree_slot_budget, "Maximum forest size")->capture_default_str();
  cmd->add_option("--hyperplane-budget", o.run.translator.hyperplane_budget, "Maximum hyperplanes")
      ->capture_default_str();
}

void add_planner_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--w-latency", o.run.weights.latency, "Weight of serving time")->capture_default_str();
  cmd->add_option("--w-devices", o.run.weights.devices, "Weight of devices used")->capture_default_str();
  cmd->add_option("--w-overhead", o.run.weights.overhead, "Weight of byte overhead")->capture_default_str();
  cmd->add_option("--bandwidth", o.run.bandwidth, "Bytes per time unit")->capture_default_str();
  cmd->add_option("--src-host", o.run.src_host, "Requesting host")->capture_default_str();
  cmd->add_option("--dst-host", o.run.dst_host, "Receiving host (-1: last host)")->capture_default_str();
  cmd->add_option("--path-limit", o.run.paths.limit, "Candidate paths")->capture_default_str();
  cmd->add_option("--max-len", o.run.paths.max_len, "Maximum devices per path")->capture_default_str();
  cmd->add_option("--threads", o.run.planner_threads, "Planner threads")->capture_default_str();
  cmd->add_option("--rid", o.run.rid, "Route id carried by requests")->capture_default_str();
}

void add_device_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--stages", o.device.stage_count, "Stages per programmable device")->capture_default_str();
  cmd->add_option("--tcam", o.device.tcam_capacity, "TCAM entries per table")->capture_default_str();
  cmd->add_option("--sram", o.device.sram_capacity, "SRAM entries per table")->capture_default_str();
  cmd->add_option("--device-mul-slots", o.device.mul_slots, "svm_mul slots per stage")->capture_default_str();
}

TableProgram program_from(const Options& o) {
  if (!o.entries.empty()) return load_program(o.entries);
  if (o.model.empty()) throw Error(ErrorCode::kInvalidArgument, "need --entries or --model");
  return translate(load_model(o.model), o.run.translator);
}

int cmd_translate(const Options& o) {
  const TableProgram program = translate(load_model(o.model), o.run.translator);
  save_program(program, o.out);
  const ResourceReport r = count_resources(program);
  std::cout << "stages " << r.total_stages << " tcam " << r.total_tcam << " sram " << r.total_sram;
  if (!program.info.tree_depths.empty()) std::cout << " mean_tree_depth " << r.mean_tree_depth;
  std::cout << "\n";
  for (const auto& t : r.tables) {
    std::cout << "  stage " << t.stage << " " << to_string(t.kind) << "[" << t.slot << "] " << t.entries << "\n";
  }
  return 0;
}

int cmd_plan(const Options& o) {
  const TableProgram program = program_from(o);
  const NetworkModel net = load_topology(o.topology);
  const DeploymentPlan plan = plan_program(program, net, o.run);
  save_plan(plan, o.out);
  std::cout << "path";
  for (int d : plan.path) std::cout << " " << d;
  std::cout << "\nJ " << plan.objective.total << " (latency " << plan.objective.latency << ", devices "
            << plan.objective.devices << ", overhead " << plan.objective.overhead << ")\n"
            << "paths " << plan.stats.paths_considered << " feasible " << plan.stats.paths_feasible << " states "
            << plan.stats.states << " seconds " << plan.stats.seconds << "\n";
  return 0;
}

int cmd_deploy(const Options& o) {
  const TableProgram program = program_from(o);
  const DeploymentPlan plan = load_plan(o.plan);
  const NetworkModel net = load_topology(o.topology);
  const PlannerProblem pb = make_problem(program, net, o.run);
  DeploymentPlan audited = plan;
  audited.path_index = -1;
  for (std::size_t p = 0; p < pb.paths.size(); ++p) {
    if (pb.paths[p] == plan.path) audited.path_index = static_cast<int>(p);
  }
  if (audited.path_index >= 0) {
    const Validation v = validate_plan(audited, pb);
    for (const auto& msg : v.violations) std::cerr << "violation: " << msg << "\n";
    if (!v.ok) return 1;
  }

  const std::filesystem::path dir(o.out);
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["mid"] = program.info.mid;
  manifest["vid"] = program.info.vid;
  manifest["rid"] = o.run.rid;
  manifest["path"] = plan.path;
  manifest["devices"] = nlohmann::json::array();
  for (const auto& [device, bundle] : slice_program(program, plan)) {
    const std::string file = "device_" + std::to_string(device) + ".json";
    save_program(bundle, dir / file);
    manifest["devices"].push_back({{"device", device}, {"file", file}, {"entries", bundle.entry_count()}});
    std::cout << "device " << device << ": " << bundle.entry_count() << " entries -> " << (dir / file).string()
              << "\n";
  }
  std::ofstream(dir / "manifest.json") << manifest.dump(1) << "\n";
  return 0;
}

int cmd_infer(const Options& o) {
  const TableProgram program = program_from(o);
  const NetworkModel net = load_topology(o.topology);
  const DeploymentPlan plan = o.plan.empty() ? plan_program(program, net, o.run) : load_plan(o.plan);
  const Dataset data = load_dataset_csv(o.data);
  Network network(net);
  const int dst = o.run.dst_host < 0 ? static_cast<int>(net.hosts.size()) - 1 : o.run.dst_host;
  deploy(network, program, plan, o.run.rid, dst);
  const InferenceResult r = infer(network, program.info, data, o.run.src_host, o.run.rid);
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out);
    out = &file;
  }
  *out << "row,label\n";
  for (std::size_t i = 0; i < r.labels.size(); ++i) *out << i << "," << r.labels[i] << "\n";
  std::cerr << data.rows.size() << " requests, mean devices " << r.mean_devices << ", mean wire bytes "
            << r.mean_wire_bytes << "\n";
  return 0;
}

int cmd_eval(const Options& o) {
  const RunReport r = run_pipeline(o.model, o.topology, o.data, o.run);
  if (!o.report.empty()) {
    std::ofstream(o.report) << serialize_report(r);
  }
  std::cout << std::setprecision(6) << "rows " << r.rows << "\nkappa_vs_oracle " << r.kappa_vs_oracle
            << "\nagreement_vs_oracle " << r.agreement_vs_oracle << "\naccuracy " << r.vs_truth.accuracy
            << "\nmacro_f1 " << r.vs_truth.macro_f1 << "\ndevices_used " << r.plan.objective.devices << "\n";
  return 0;
}

int cmd_topo_gen(const Options& o) {
  const NetworkModel net = generate(topology_kind_from_string(o.kind), o.a, o.b, o.seed, o.device);
  save_topology(net, o.out);
  std::cout << net.devices.size() << " devices (" << net.programmable_count() << " programmable), "
            << net.links.size() << " links, " << net.hosts.size() << " hosts\n";
  return 0;
}

int cmd_bench(const Options& o) {
  std::vector<BenchCase> cases = default_bench_cases();
  if (o.quick) {
    std::vector<BenchCase> small;
    for (const auto& c : cases) {
      if (c.program_stages == 20) small.push_back(c);
    }
    cases = small;
  }
  const auto results = bench_planner(cases, o.seed, o.run);
  const std::string table = format_bench(results);
  if (!o.out.empty()) std::ofstream(o.out) << table;
  std::cout << table;
  double worst = 0;
  for (const auto& r : results) worst = std::max(worst, r.seconds);
  std::cerr << "slowest instance " << worst << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Translate, place and simulate in-network classifiers"};
  app.require_subcommand(1);
  Options o;

  auto* translate_cmd = app.add_subcommand("translate", "Model file -> entries file");
  translate_cmd->add_option("--model", o.model, "Model exchange file")->required();
  translate_cmd->add_option("--out", o.out, "Entries file to write")->required();
  add_translator_flags(translate_cmd, o);

  auto* plan_cmd = app.add_subcommand("plan", "Compute an optimal deployment plan");
  plan_cmd->add_option("--entries", o.entries, "Entries file");
  plan_cmd->add_option("--model", o.model, "Model file (translated on the fly)");
  plan_cmd->add_option("--topology", o.topology, "Topology file")->required();
  plan_cmd->add_option("--out", o.out, "Plan file to write")->required();
  add_translator_flags(plan_cmd, o);
  add_planner_flags(plan_cmd, o);

  auto* deploy_cmd = app.add_subcommand("deploy", "Split a program into per-device entries files");
  deploy_cmd->add_option("--entries", o.entries, "Entries file");
  deploy_cmd->add_option("--model", o.model, "Model file (translated on the fly)");
  deploy_cmd->add_option("--plan", o.plan, "Plan file")->required();
  deploy_cmd->add_option("--topology", o.topology, "Topology file")->required();
  deploy_cmd->add_option("--out-dir", o.out, "Directory for device bundles and manifest")->required();
  add_translator_flags(deploy_cmd, o);
  add_planner_flags(deploy_cmd, o);

  auto* infer_cmd = app.add_subcommand("infer", "Send one request per dataset row through the network");
  infer_cmd->add_option("--entries", o.entries, "Entries file");
  infer_cmd->add_option("--model", o.model, "Model file (translated on the fly)");
  infer_cmd->add_option("--plan", o.plan, "Plan file (planned on the fly when absent)");
  infer_cmd->add_option("--topology", o.topology, "Topology file")->required();
  infer_cmd->add_option("--data", o.data, "Quantized dataset CSV")->required();
  infer_cmd->add_option("--out", o.out, "Predictions CSV (stdout when absent)");
  add_translator_flags(infer_cmd, o);
  add_planner_flags(infer_cmd, o);

  auto* eval_cmd = app.add_subcommand("eval", "Full pipeline with metrics against oracle and labels");
  eval_cmd->add_option("--model", o.model, "Model exchange file")->required();
  eval_cmd->add_option("--topology", o.topology, "Topology file")->required();
  eval_cmd->add_option("--data", o.data, "Quantized dataset CSV")->required();
  eval_cmd->add_option("--report", o.report, "Report file to write");
  add_translator_flags(eval_cmd, o);
  add_planner_flags(eval_cmd, o);

  auto* topo_cmd = app.add_subcommand("topo-gen", "Generate a topology file");
  topo_cmd->add_option("--kind", o.kind, "fat_tree | dcell | bcube | jellyfish | line")->capture_default_str();
  topo_cmd->add_option("--a", o.a, "First parameter (k, n)")->capture_default_str();
  topo_cmd->add_option("--b", o.b, "Second parameter (k, d)")->capture_default_str();
  topo_cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  topo_cmd->add_option("--out", o.out, "Topology file to write")->required();
  add_device_flags(topo_cmd, o);

  auto* bench_cmd = app.add_subcommand("bench", "Time the planner over the topology sweep");
  bench_cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  bench_cmd->add_option("--out", o.out, "Write the timing table here");
  bench_cmd->add_flag("--quick", o.quick, "Only the 20-stage programs");
  add_planner_flags(bench_cmd, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*translate_cmd) return cmd_translate(o);
    if (*plan_cmd) return cmd_plan(o);
    if (*deploy_cmd) return cmd_deploy(o);
    if (*infer_cmd) return cmd_infer(o);
    if (*eval_cmd) return cmd_eval(o);
    if (*topo_cmd) return cmd_topo_gen(o);
    if (*bench_cmd) return cmd_bench(o);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
