// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef INNET_ORCHESTRATOR_HPP_
#define INNET_ORCHESTRATOR_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "innet/metrics.hpp"
#include "innet/model_ir.hpp"
#include "innet/network.hpp"
#include "innet/planner.hpp"
#include "innet/table_program.hpp"
#include "innet/topology.hpp"
#include "innet/translator.hpp"

namespace innet {

struct RunConfig {
  TranslatorConfig translator;
  Weights weights;
  PathOptions paths;
  // Bytes per time unit, used to derive transfer times.
  double bandwidth = 1.0;
  int src_host = 0;
  // Negative picks the last host of the topology.
  int dst_host = -1;
  int rid = 1;
  int planner_threads = 1;
};

// Everything needed to place one program on one network.
PlannerProblem make_problem(const TableProgram& program, const NetworkModel& net,
                            const RunConfig& cfg);

// Single solve for one-segment programs, per-segment solves merged otherwise.
DeploymentPlan plan_program(const TableProgram& program, const NetworkModel& net,
                            const RunConfig& cfg);

// Per-device install bundles: stage indices become device stages, the init
// action goes with the first program stage and `final_stage` with the last.
std::map<int, TableProgram> slice_program(const TableProgram& program, const DeploymentPlan& plan);

// Registers the layout, installs every bundle and routes `rid` along the
// plan's path to `dst_host`.
void deploy(Network& network, const TableProgram& program, const DeploymentPlan& plan, int rid,
            int dst_host);

struct InferenceResult {
  std::vector<ClassId> labels;
  double mean_devices = 0.0;
  double mean_wire_bytes = 0.0;
};

// One request per row with sequential 12-bit packet ids; responses are
// matched back to rows by id.
InferenceResult infer(const Network& network, const ProgramInfo& info, const Dataset& data,
                      int src_host, int rid);

struct DeviceInstall {
  int device = 0;
  ResourceUsage usage;
};

struct RunReport {
  std::string model_name;
  ModelKind kind = ModelKind::kDecisionTree;
  ResourceReport resources;
  DeploymentPlan plan;
  std::vector<DeviceInstall> installs;
  std::size_t rows = 0;
  std::vector<ClassId> pipeline;
  std::vector<ClassId> oracle;
  double kappa_vs_oracle = 0.0;
  double agreement_vs_oracle = 0.0;
  Score vs_truth;
  double mean_devices = 0.0;
  double mean_wire_bytes = 0.0;
};

// translate -> plan -> deploy -> infer -> score. Errors carry a phase label.
RunReport run_pipeline(const ModelSpec& model, const NetworkModel& net, const Dataset& data,
                       const RunConfig& cfg);
RunReport run_pipeline(const std::filesystem::path& model, const std::filesystem::path& topology,
                       const std::filesystem::path& dataset, const RunConfig& cfg);

std::string serialize_report(const RunReport& report);

struct BenchCase {
  TopologyKind kind = TopologyKind::kFatTree;
  int a = 4;
  int b = 0;
  int program_stages = 5;
};

struct BenchResult {
  BenchCase spec;
  std::string label;
  int devices = 0;
  std::size_t paths = 0;
  bool feasible = false;
  double objective = 0.0;
  double seconds = 0.0;
};

// The topology sweep of the evaluation (three sizes per family) crossed with
// program sizes of 5, 10, 15 and 20 stages.
std::vector<BenchCase> default_bench_cases();

// Times planning of a synthetic program per case. Devices start with a
// seeded random fraction of their table capacity already in use.
std::vector<BenchResult> bench_planner(const std::vector<BenchCase>& cases, std::uint64_t seed,
                                       const RunConfig& cfg = {});
// Tab-separated, one row per case, with a header line.
std::string format_bench(const std::vector<BenchResult>& results);

}  // namespace innet

#endif  // INNET_ORCHESTRATOR_HPP_
