// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef INNET_PLANNER_HPP_
#define INNET_PLANNER_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "innet/data_plane.hpp"
#include "innet/table_program.hpp"
#include "innet/topology.hpp"

namespace innet {

struct TableNeed {
  TableKind kind = TableKind::kDtLayer;
  int slot = 0;
  std::size_t entries = 0;

  friend bool operator==(const TableNeed&, const TableNeed&) = default;
};

struct StageNeed {
  std::vector<TableNeed> tables;
  int segment = 0;
  // Stages sharing a non-negative group must land on one device.
  int group = -1;

  friend bool operator==(const StageNeed&, const StageNeed&) = default;
};

// The planner's view of a table program: per-stage table needs only.
struct ProgramShape {
  std::vector<StageNeed> stages;

  static ProgramShape of(const TableProgram& program);
  int segment_count() const;
  // Stages of one segment, in order, with their original indices.
  std::pair<ProgramShape, std::vector<int>> segment(int s) const;

  friend bool operator==(const ProgramShape&, const ProgramShape&) = default;
};

// Free capacity per (device, device stage, table slot).
class CapacityView {
 public:
  CapacityView() = default;
  explicit CapacityView(const NetworkModel& net);

  int device_count() const { return static_cast<int>(configs_.size()); }
  const DeviceConfig& config(int device) const { return configs_.at(static_cast<std::size_t>(device)); }
  std::size_t used(int device, int stage, TableKind kind, int slot) const;
  std::size_t free(int device, int stage, TableKind kind, int slot) const;

  // Records entries already present on a device (e.g. from query_resources).
  void add_usage(int device, const ResourceUsage& usage);
  void add_usage(int device, int stage, TableKind kind, int slot, std::size_t entries);

  // F_{i,j,k}: does `need` fit into device stage `stage` of `device`?
  bool fits(const StageNeed& need, int device, int stage) const;

 private:
  std::vector<DeviceConfig> configs_;
  std::map<std::tuple<int, int, TableKind, int>, std::size_t> used_;
};

// Time constants and packet sizes of the objective.
struct CostModel {
  double per_device = 1.0;         // l_e
  double per_hop = 1.0;            // l_p
  double request_transfer = 1.0;   // l_t^r
  double response_transfer = 1.0;  // l_t^s
  double request_bytes = 0.0;      // s_p^rq
  double response_bytes = 0.0;     // s_p^rs

  // Transfer times are packet bytes divided by `bandwidth` (bytes per time unit).
  static CostModel for_layout(const PacketLayout& layout, double bandwidth = 1.0);
};

struct Weights {
  double latency = 1.0 / 3.0;
  double devices = 1.0 / 3.0;
  double overhead = 1.0 / 3.0;

  // Throws kInvalidArgument unless all are positive and they sum to 1.
  void validate() const;
};

struct PlannerProblem {
  ProgramShape shape;
  std::vector<Path> paths;
  CapacityView capacity;
  CostModel cost;
  Weights weights;
  // When set, the first program stage must come after this slot on the path:
  // a later device, or the same device at a later stage.
  std::optional<std::pair<int, int>> start_after;
  // Per-path subproblems run on up to this many threads.
  int threads = 1;
};

struct Placement {
  int device = 0;
  int stage = 0;

  friend bool operator==(const Placement&, const Placement&) = default;
  friend auto operator<=>(const Placement&, const Placement&) = default;
};

struct Objective {
  double latency = 0.0;   // J_L
  double devices = 0.0;   // J_D
  double overhead = 0.0;  // J_O
  double total = 0.0;     // J
};

struct SolverStats {
  std::size_t paths_considered = 0;
  std::size_t paths_feasible = 0;
  std::size_t states = 0;
  double seconds = 0.0;
};

struct DeploymentPlan {
  int path_index = 0;
  Path path;
  // One slot per program stage.
  std::vector<Placement> placements;
  int last_device = 0;
  Objective objective;
  SolverStats stats;
};

// Binary variables of the formulation, indexed [i][j][k], [k], [p], [p][k].
struct DecisionVars {
  std::vector<std::vector<std::vector<std::uint8_t>>> x;
  std::vector<std::uint8_t> y;
  std::vector<std::uint8_t> z;
  std::vector<std::vector<std::uint8_t>> c;

  static DecisionVars zeros(int stages, int device_stages, int devices, int paths);
};

// 1-based position of `device` on `path`, 0 if absent.
int position_on(const Path& path, int device);

Objective objective(const DecisionVars& vars, const PlannerProblem& problem);
// Same quantity computed from a plan.
Objective plan_objective(const DeploymentPlan& plan, const PlannerProblem& problem);
DecisionVars to_decision_vars(const DeploymentPlan& plan, const PlannerProblem& problem);

// Exact minimum of J over all enumerated paths. Throws kInfeasible naming the
// tightest capacity when no path admits a placement.
DeploymentPlan solve(const PlannerProblem& problem);

// One solve per segment (tree or hyperplane) in order. The path is fixed by the
// first segment among paths that can host the whole program; later segments
// start after the previous one and see its capacity consumed.
std::vector<DeploymentPlan> plan_multi(const PlannerProblem& problem);
// Joins per-segment plans into one plan of the whole program.
DeploymentPlan merge_plans(const std::vector<DeploymentPlan>& plans, const PlannerProblem& problem);

struct Validation {
  bool ok = true;
  std::vector<std::string> violations;
};

Validation validate_plan(const DeploymentPlan& plan, const PlannerProblem& problem);

std::string serialize_plan(const DeploymentPlan& plan);
DeploymentPlan parse_plan(std::string_view text);
DeploymentPlan load_plan(const std::filesystem::path& path);
void save_plan(const DeploymentPlan& plan, const std::filesystem::path& path);

}  // namespace innet

#endif  // INNET_PLANNER_HPP_
