// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#include "innet/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

#include "innet/error.hpp"
#include "json_util.hpp"

namespace innet {

// ---------------------------------------------------------------------------
// Problem pieces

ProgramShape ProgramShape::of(const TableProgram& program) {
  ProgramShape shape;
  for (const auto& s : program.stages) {
    StageNeed need;
    need.segment = s.segment;
    need.group = s.group;
    for (const auto& t : s.tables) need.tables.push_back(TableNeed{t.kind, t.slot, t.entries.size()});
    shape.stages.push_back(std::move(need));
  }
  return shape;
}

int ProgramShape::segment_count() const {
  int n = 0;
  for (const auto& s : stages) n = std::max(n, s.segment + 1);
  return n;
}

std::pair<ProgramShape, std::vector<int>> ProgramShape::segment(int s) const {
  std::pair<ProgramShape, std::vector<int>> out;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i].segment != s) continue;
    out.first.stages.push_back(stages[i]);
    out.second.push_back(static_cast<int>(i));
  }
  return out;
}

CapacityView::CapacityView(const NetworkModel& net) {
  for (const auto& d : net.devices) configs_.push_back(d.config);
}

std::size_t CapacityView::used(int device, int stage, TableKind kind, int slot) const {
  auto it = used_.find({device, stage, kind, slot});
  return it == used_.end() ? 0 : it->second;
}

std::size_t CapacityView::free(int device, int stage, TableKind kind, int slot) const {
  const auto& cfg = config(device);
  if (!cfg.programmable || stage < 0 || stage >= cfg.stage_count || slot < 0 || slot >= cfg.slots(kind)) {
    return 0;
  }
  const std::size_t u = used(device, stage, kind, slot);
  return u >= cfg.capacity(kind) ? 0 : cfg.capacity(kind) - u;
}

void CapacityView::add_usage(int device, const ResourceUsage& usage) {
  for (const auto& t : usage.tables) add_usage(device, t.stage, t.kind, t.slot, t.entries);
}

void CapacityView::add_usage(int device, int stage, TableKind kind, int slot, std::size_t entries) {
  used_[{device, stage, kind, slot}] += entries;
}

bool CapacityView::fits(const StageNeed& need, int device, int stage) const {
  const auto& cfg = config(device);
  if (!cfg.programmable || stage < 0 || stage >= cfg.stage_count) return false;
  for (const auto& t : need.tables) {
    if (t.slot < 0 || t.slot >= cfg.slots(t.kind)) return false;
    if (used(device, stage, t.kind, t.slot) + t.entries > cfg.capacity(t.kind)) return false;
  }
  return true;
}

CostModel CostModel::for_layout(const PacketLayout& layout, double bandwidth) {
  if (!(bandwidth > 0)) throw Error(ErrorCode::kInvalidArgument, "bandwidth must be positive");
  CostModel c;
  c.request_bytes = static_cast<double>(layout.request_bytes());
  c.response_bytes = static_cast<double>(layout.response_bytes());
  c.request_transfer = c.request_bytes / bandwidth;
  c.response_transfer = c.response_bytes / bandwidth;
  return c;
}

void Weights::validate() const {
  if (!(latency > 0) || !(devices > 0) || !(overhead > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "objective weights must be positive");
  }
  if (std::abs(latency + devices + overhead - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "objective weights must sum to 1");
  }
}

DecisionVars DecisionVars::zeros(int stages, int device_stages, int devices, int paths) {
  DecisionVars v;
  v.x.assign(static_cast<std::size_t>(stages),
             std::vector<std::vector<std::uint8_t>>(static_cast<std::size_t>(device_stages),
                                                    std::vector<std::uint8_t>(static_cast<std::size_t>(devices), 0)));
  v.y.assign(static_cast<std::size_t>(devices), 0);
  v.z.assign(static_cast<std::size_t>(paths), 0);
  v.c.assign(static_cast<std::size_t>(paths), std::vector<std::uint8_t>(static_cast<std::size_t>(devices), 0));
  return v;
}

int position_on(const Path& path, int device) {
  auto it = std::find(path.begin(), path.end(), device);
  return it == path.end() ? 0 : static_cast<int>(it - path.begin()) + 1;
}

namespace {

Objective finish(Objective o, const Weights& w) {
  o.total = w.latency * o.latency + w.devices * o.devices + w.overhead * o.overhead;
  return o;
}

Objective objective_of(int used_devices, int path_len, int pos_last, const PlannerProblem& pb) {
  const CostModel& c = pb.cost;
  Objective o;
  o.devices = used_devices;
  o.latency = c.per_device * used_devices + c.per_hop * path_len +
              c.request_transfer * pos_last + c.response_transfer * (path_len - pos_last);
  o.overhead = c.request_bytes * pos_last + c.response_bytes * (path_len - pos_last);
  return finish(o, pb.weights);
}

}  // namespace

Objective objective(const DecisionVars& vars, const PlannerProblem& problem) {
  const CostModel& c = problem.cost;
  Objective o;
  for (auto y : vars.y) {
    o.latency += c.per_device * y;
    o.devices += y;
  }
  for (std::size_t p = 0; p < vars.z.size() && p < problem.paths.size(); ++p) {
    const auto len = static_cast<double>(problem.paths[p].size());
    o.latency += c.per_hop * vars.z[p] * len;
    for (std::size_t k = 0; k < vars.c[p].size(); ++k) {
      if (!vars.c[p][k]) continue;
      const double pos = position_on(problem.paths[p], static_cast<int>(k));
      o.latency += c.request_transfer * pos + c.response_transfer * (len - pos);
      o.overhead += c.request_bytes * pos + (len - pos) * c.response_bytes;
    }
  }
  return finish(o, problem.weights);
}

Objective plan_objective(const DeploymentPlan& plan, const PlannerProblem& problem) {
  std::set<int> used;
  for (const auto& pl : plan.placements) used.insert(pl.device);
  const int pos = plan.placements.empty() ? 0 : position_on(plan.path, plan.placements.back().device);
  return objective_of(static_cast<int>(used.size()), static_cast<int>(plan.path.size()), pos, problem);
}

DecisionVars to_decision_vars(const DeploymentPlan& plan, const PlannerProblem& problem) {
  int max_stages = 0;
  for (int k = 0; k < problem.capacity.device_count(); ++k) {
    max_stages = std::max(max_stages, problem.capacity.config(k).stage_count);
  }
  for (const auto& pl : plan.placements) max_stages = std::max(max_stages, pl.stage + 1);
  auto v = DecisionVars::zeros(static_cast<int>(problem.shape.stages.size()), max_stages,
                               problem.capacity.device_count(), static_cast<int>(problem.paths.size()));
  for (std::size_t i = 0; i < plan.placements.size() && i < v.x.size(); ++i) {
    const auto& pl = plan.placements[i];
    v.x[i][static_cast<std::size_t>(pl.stage)][static_cast<std::size_t>(pl.device)] = 1;
    v.y[static_cast<std::size_t>(pl.device)] = 1;
  }
  if (plan.path_index >= 0 && plan.path_index < static_cast<int>(v.z.size())) {
    v.z[static_cast<std::size_t>(plan.path_index)] = 1;
    if (!plan.placements.empty()) {
      v.c[static_cast<std::size_t>(plan.path_index)][static_cast<std::size_t>(plan.last_device)] = 1;
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Exact per-path search
//
// On a fixed path J = A * devices_used + B * pos_last + const, so the search
// only needs the set of achievable (devices_used, pos_last) pairs. A backward
// pass computes, for every slot a stage may occupy, which pairs its suffix can
// realise; a forward pass then picks the lexicographically smallest plan that
// reaches an optimal pair.

namespace {

struct PathResult {
  bool feasible = false;
  std::vector<Placement> placements;
  double total = 0.0;
  std::size_t states = 0;
};

class PathSearch {
 public:
  PathSearch(const PlannerProblem& pb, const Path& path) : pb_(pb), path_(path) {
    len_ = static_cast<int>(path.size());
    if (len_ > 63) throw Error(ErrorCode::kInvalidArgument, "paths longer than 63 devices are not supported");
    stages_ = static_cast<int>(pb.shape.stages.size());
    for (int d : path) width_ = std::max(width_, pb.capacity.config(d).stage_count);
    tie_.assign(static_cast<std::size_t>(std::max(stages_, 1)), 0);
    for (int i = 0; i + 1 < stages_; ++i) {
      for (int a = 0; a <= i && !tie_[static_cast<std::size_t>(i)]; ++a) {
        const int g = pb.shape.stages[static_cast<std::size_t>(a)].group;
        if (g < 0) continue;
        for (int b = i + 1; b < stages_; ++b) {
          if (pb.shape.stages[static_cast<std::size_t>(b)].group == g) {
            tie_[static_cast<std::size_t>(i)] = 1;
            break;
          }
        }
      }
    }
    start_pos_ = -1;
    start_stage_ = -1;
    if (pb.start_after) {
      start_pos_ = position_on(path, pb.start_after->first) - 1;
      start_stage_ = pb.start_after->second;
    }
  }

  PathResult run() {
    PathResult r;
    if (stages_ == 0 || width_ == 0) return r;
    if (pb_.start_after && start_pos_ < 0) return r;
    const std::size_t cells = static_cast<std::size_t>(stages_) * len_ * width_;
    fit_.assign(cells, 0);
    for (int i = 0; i < stages_; ++i) {
      for (int p = 0; p < len_; ++p) {
        for (int j = 0; j < width_; ++j) {
          fit_[cell(i, p, j)] = pb_.capacity.fits(pb_.shape.stages[static_cast<std::size_t>(i)],
                                                  path_[static_cast<std::size_t>(p)], j);
        }
      }
    }
    r.states = cells;
    backward();

    // Optimal (devices, pos_last) pairs over every admissible first slot.
    std::vector<std::uint64_t> reach(static_cast<std::size_t>(len_), 0);
    for (int p = 0; p < len_; ++p) {
      for (int j = 0; j < width_; ++j) {
        if (!start_ok(p, j)) continue;
        for (int pl = 0; pl < len_; ++pl) reach[static_cast<std::size_t>(pl)] |= sets(0, p, j)[pl];
      }
    }
    double best = 0.0;
    bool any = false;
    for (int pl = 0; pl < len_; ++pl) {
      for (int n = 1; n <= len_; ++n) {
        if (!(reach[static_cast<std::size_t>(pl)] >> n & 1u)) continue;
        const double j = objective_of(n, len_, pl + 1, pb_).total;
        if (!any || j < best) best = j;
        any = true;
      }
    }
    if (!any) return r;
    const double eps = 1e-9 * std::max(1.0, std::abs(best));
    optimal_.assign(static_cast<std::size_t>(len_), 0);
    for (int pl = 0; pl < len_; ++pl) {
      for (int n = 1; n <= len_; ++n) {
        if ((reach[static_cast<std::size_t>(pl)] >> n & 1u) &&
            objective_of(n, len_, pl + 1, pb_).total <= best + eps) {
          optimal_[static_cast<std::size_t>(pl)] |= std::uint64_t{1} << n;
        }
      }
    }

    // Forward: smallest (device id, stage) at each step that keeps an optimal
    // pair reachable.
    int prev_p = -1;
    int prev_j = -1;
    int used = 0;
    for (int i = 0; i < stages_; ++i) {
      int best_p = -1;
      int best_j = -1;
      for (int p = 0; p < len_; ++p) {
        for (int j = 0; j < width_; ++j) {
          if (i == 0 ? !start_ok(p, j) : !step_ok(i - 1, prev_p, prev_j, p, j)) continue;
          const int before = (i == 0 || p != prev_p) ? used : used - 1;
          if (!completes(i, p, j, before)) continue;
          if (best_p < 0 || std::pair(path_[static_cast<std::size_t>(p)], j) <
                                std::pair(path_[static_cast<std::size_t>(best_p)], best_j)) {
            best_p = p;
            best_j = j;
          }
        }
      }
      if (best_p < 0) throw Error(ErrorCode::kInvariant, "planner reconstruction lost feasibility");
      if (i == 0 || best_p != prev_p) ++used;
      prev_p = best_p;
      prev_j = best_j;
      r.placements.push_back(Placement{path_[static_cast<std::size_t>(best_p)], best_j});
    }
    r.feasible = true;
    r.total = best;
    return r;
  }

 private:
  std::size_t cell(int i, int p, int j) const {
    return (static_cast<std::size_t>(i) * len_ + p) * width_ + j;
  }
  // Bitset over devices used (bit n) for each pos_last, for stage i in (p, j).
  std::uint64_t* sets(int i, int p, int j) { return &sets_[cell(i, p, j) * len_]; }

  bool start_ok(int p, int j) const {
    if (!fit_[cell(0, p, j)]) return false;
    if (start_pos_ < 0) return true;
    return p > start_pos_ || (p == start_pos_ && j > start_stage_);
  }

  bool step_ok(int i, int p, int j, int np, int nj) const {
    if (!fit_[cell(i + 1, np, nj)]) return false;
    if (np == p) return nj > j;
    return np > p && !tie_[static_cast<std::size_t>(i)];
  }

  // Can stage i at (p, j), with `before` other devices already used, still
  // finish at an optimal pair?
  bool completes(int i, int p, int j, int before) {
    const std::uint64_t* s = sets(i, p, j);
    for (int pl = 0; pl < len_; ++pl) {
      if (s[pl] == 0) continue;
      if ((s[pl] << before) & optimal_[static_cast<std::size_t>(pl)]) return true;
    }
    return false;
  }

  void backward() {
    sets_.assign(static_cast<std::size_t>(stages_) * len_ * width_ * len_, 0);
    const int last = stages_ - 1;
    for (int p = 0; p < len_; ++p) {
      for (int j = 0; j < width_; ++j) {
        if (fit_[cell(last, p, j)]) sets(last, p, j)[p] = std::uint64_t{1} << 1;
      }
    }
    std::vector<std::uint64_t> later(static_cast<std::size_t>(len_));
    std::vector<std::uint64_t> same(static_cast<std::size_t>(len_));
    for (int i = last - 1; i >= 0; --i) {
      std::fill(later.begin(), later.end(), 0);
      for (int p = len_ - 1; p >= 0; --p) {
        // `later` holds stage i+1 options strictly after position p.
        std::fill(same.begin(), same.end(), 0);
        for (int j = width_ - 1; j >= 0; --j) {
          if (fit_[cell(i, p, j)]) {
            std::uint64_t* out = sets(i, p, j);
            for (int pl = 0; pl < len_; ++pl) {
              out[pl] = same[static_cast<std::size_t>(pl)] |
                        (tie_[static_cast<std::size_t>(i)] ? 0 : later[static_cast<std::size_t>(pl)]);
            }
          }
          const std::uint64_t* next = sets(i + 1, p, j);
          for (int pl = 0; pl < len_; ++pl) same[static_cast<std::size_t>(pl)] |= next[pl];
        }
        // Stage i+1 anywhere at position p counts one more device from i's view.
        for (int j = 0; j < width_; ++j) {
          const std::uint64_t* next = sets(i + 1, p, j);
          for (int pl = 0; pl < len_; ++pl) later[static_cast<std::size_t>(pl)] |= next[pl] << 1;
        }
      }
    }
  }

  const PlannerProblem& pb_;
  const Path& path_;
  int len_ = 0;
  int stages_ = 0;
  int width_ = 0;
  int start_pos_ = -1;
  int start_stage_ = -1;
  std::vector<std::uint8_t> tie_;
  std::vector<std::uint8_t> fit_;
  std::vector<std::uint64_t> sets_;
  std::vector<std::uint64_t> optimal_;
};

// Merge order: J, then shorter path, then lexicographic plan, then path index.
bool better(const PathResult& a, std::size_t a_len, int a_idx, const PathResult& b, std::size_t b_len,
            int b_idx) {
  const double eps = 1e-9 * std::max(1.0, std::max(std::abs(a.total), std::abs(b.total)));
  if (a.total < b.total - eps) return true;
  if (b.total < a.total - eps) return false;
  if (a_len != b_len) return a_len < b_len;
  if (a.placements != b.placements) return a.placements < b.placements;
  return a_idx < b_idx;
}

std::vector<PathResult> solve_all_paths(const PlannerProblem& pb) {
  std::vector<PathResult> results(pb.paths.size());
  const int threads = std::max(1, std::min<int>(pb.threads, static_cast<int>(pb.paths.size())));
  auto work = [&](int t) {
    for (std::size_t p = static_cast<std::size_t>(t); p < pb.paths.size(); p += static_cast<std::size_t>(threads)) {
      results[p] = PathSearch(pb, pb.paths[p]).run();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  return results;
}

std::string describe_infeasible(const PlannerProblem& pb) {
  std::ostringstream msg;
  if (pb.paths.empty()) return "no candidate paths";
  // A stage that fits nowhere names the table with the largest shortfall.
  for (std::size_t i = 0; i < pb.shape.stages.size(); ++i) {
    const auto& need = pb.shape.stages[i];
    bool anywhere = false;
    for (const auto& path : pb.paths) {
      for (int d : path) {
        for (int j = 0; j < pb.capacity.config(d).stage_count && !anywhere; ++j) {
          anywhere = pb.capacity.fits(need, d, j);
        }
      }
    }
    if (anywhere) continue;
    const TableNeed* worst = nullptr;
    std::size_t worst_free = 0;
    long long worst_gap = -1;
    for (const auto& t : need.tables) {
      std::size_t best_free = 0;
      for (const auto& path : pb.paths) {
        for (int d : path) {
          for (int j = 0; j < pb.capacity.config(d).stage_count; ++j) {
            best_free = std::max(best_free, pb.capacity.free(d, j, t.kind, t.slot));
          }
        }
      }
      const long long gap = static_cast<long long>(t.entries) - static_cast<long long>(best_free);
      if (gap > worst_gap) {
        worst_gap = gap;
        worst = &t;
        worst_free = best_free;
      }
    }
    msg << "program stage " << i;
    if (worst != nullptr && worst_gap > 0) {
      msg << " needs " << worst->entries << " entries in " << to_string(worst->kind) << "[" << worst->slot
          << "] but the largest free capacity on any candidate path is " << worst_free;
    } else {
      msg << " fits no programmable device stage on any candidate path";
    }
    return msg.str();
  }
  // Every stage fits somewhere; report how far the best path gets in order.
  int best_prefix = 0;
  std::size_t best_path = 0;
  for (std::size_t p = 0; p < pb.paths.size(); ++p) {
    const Path& path = pb.paths[p];
    int pos = 0;
    int stage = -1;
    int placed = 0;
    if (pb.start_after) {
      pos = position_on(path, pb.start_after->first) - 1;
      stage = pb.start_after->second;
      if (pos < 0) continue;
    }
    for (const auto& need : pb.shape.stages) {
      bool ok = false;
      for (; pos < static_cast<int>(path.size()) && !ok; ++pos, stage = -1) {
        const int d = path[static_cast<std::size_t>(pos)];
        for (int j = stage + 1; j < pb.capacity.config(d).stage_count; ++j) {
          if (pb.capacity.fits(need, d, j)) {
            stage = j;
            ok = true;
            break;
          }
        }
        if (ok) break;
      }
      if (!ok) break;
      ++placed;
    }
    if (placed > best_prefix) {
      best_prefix = placed;
      best_path = p;
    }
  }
  msg << "at most " << best_prefix << " of " << pb.shape.stages.size()
      << " program stages fit in order on any candidate path (best is path " << best_path
      << "); device stage counts are the tightest limit";
  return msg.str();
}

DeploymentPlan to_plan(const PathResult& r, int index, const PlannerProblem& pb) {
  DeploymentPlan plan;
  plan.path_index = index;
  plan.path = pb.paths[static_cast<std::size_t>(index)];
  plan.placements = r.placements;
  plan.last_device = r.placements.back().device;
  plan.objective = plan_objective(plan, pb);
  return plan;
}

}  // namespace

DeploymentPlan solve(const PlannerProblem& problem) {
  problem.weights.validate();
  if (problem.shape.stages.empty()) throw Error(ErrorCode::kInvalidArgument, "program has no stages");
  const auto start = std::chrono::steady_clock::now();
  const auto results = solve_all_paths(problem);
  int best = -1;
  SolverStats stats;
  stats.paths_considered = results.size();
  for (std::size_t p = 0; p < results.size(); ++p) {
    stats.states += results[p].states;
    if (!results[p].feasible) continue;
    ++stats.paths_feasible;
    if (best < 0 || better(results[p], problem.paths[p].size(), static_cast<int>(p),
                           results[static_cast<std::size_t>(best)],
                           problem.paths[static_cast<std::size_t>(best)].size(), best)) {
      best = static_cast<int>(p);
    }
  }
  if (best < 0) throw Error(ErrorCode::kInfeasible, "no feasible deployment: " + describe_infeasible(problem));
  DeploymentPlan plan = to_plan(results[static_cast<std::size_t>(best)], best, problem);
  stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  plan.stats = stats;
  return plan;
}

std::vector<DeploymentPlan> plan_multi(const PlannerProblem& problem) {
  problem.weights.validate();
  const int segments = problem.shape.segment_count();
  if (segments <= 1) return {solve(problem)};

  // Trimming: only paths that can host the whole program stay in play.
  const auto whole = solve_all_paths(problem);
  std::vector<int> kept;
  for (std::size_t p = 0; p < whole.size(); ++p) {
    if (whole[p].feasible) kept.push_back(static_cast<int>(p));
  }
  const bool trimmed = !kept.empty();
  if (!trimmed) {
    for (std::size_t p = 0; p < problem.paths.size(); ++p) kept.push_back(static_cast<int>(p));
  }

  // Rank kept paths by the first segment's own optimum.
  PlannerProblem first = problem;
  first.shape = problem.shape.segment(0).first;
  first.paths.clear();
  for (int p : kept) first.paths.push_back(problem.paths[static_cast<std::size_t>(p)]);
  const auto first_results = solve_all_paths(first);
  std::vector<int> order;
  for (std::size_t q = 0; q < first_results.size(); ++q) {
    if (first_results[q].feasible) order.push_back(static_cast<int>(q));
  }
  if (order.empty()) {
    throw Error(ErrorCode::kInfeasible, "segment 0 (tree/hyperplane 0): no feasible deployment: " +
                                            describe_infeasible(first));
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return better(first_results[static_cast<std::size_t>(a)], first.paths[static_cast<std::size_t>(a)].size(), a,
                  first_results[static_cast<std::size_t>(b)], first.paths[static_cast<std::size_t>(b)].size(), b);
  });

  std::string last_error;
  for (int q : order) {
    const int path_index = kept[static_cast<std::size_t>(q)];
    std::vector<DeploymentPlan> plans;
    DeploymentPlan p0 = to_plan(first_results[static_cast<std::size_t>(q)], q, first);
    p0.path_index = path_index;
    plans.push_back(std::move(p0));
    PlannerProblem sub = problem;
    sub.paths = {problem.paths[static_cast<std::size_t>(path_index)]};
    bool ok = true;
    for (int s = 1; s < segments && ok; ++s) {
      const auto& prev = plans.back();
      const auto prev_shape = problem.shape.segment(s - 1).first;
      for (std::size_t k = 0; k < prev.placements.size(); ++k) {
        for (const auto& t : prev_shape.stages[k].tables) {
          sub.capacity.add_usage(prev.placements[k].device, prev.placements[k].stage, t.kind, t.slot, t.entries);
        }
      }
      sub.shape = problem.shape.segment(s).first;
      sub.start_after = std::pair(prev.placements.back().device, prev.placements.back().stage);
      try {
        DeploymentPlan next = solve(sub);
        next.path_index = path_index;
        plans.push_back(std::move(next));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInfeasible) throw;
        last_error = "segment " + std::to_string(s) + " (tree/hyperplane " + std::to_string(s) + "): " + e.what();
        ok = false;
      }
    }
    if (ok) return plans;
  }
  throw Error(ErrorCode::kInfeasible, last_error);
}

DeploymentPlan merge_plans(const std::vector<DeploymentPlan>& plans, const PlannerProblem& problem) {
  if (plans.empty()) throw Error(ErrorCode::kInvalidArgument, "nothing to merge");
  DeploymentPlan merged;
  merged.path_index = plans.front().path_index;
  merged.path = plans.front().path;
  merged.placements.resize(problem.shape.stages.size());
  for (std::size_t s = 0; s < plans.size(); ++s) {
    if (plans[s].path != merged.path) {
      throw Error(ErrorCode::kInvalidArgument, "segment plans use different paths");
    }
    const auto indices = problem.shape.segment(static_cast<int>(s)).second;
    if (indices.size() != plans[s].placements.size()) {
      throw Error(ErrorCode::kInvalidArgument, "segment " + std::to_string(s) + " plan has the wrong stage count");
    }
    for (std::size_t k = 0; k < indices.size(); ++k) {
      merged.placements[static_cast<std::size_t>(indices[k])] = plans[s].placements[k];
    }
    merged.stats.paths_considered += plans[s].stats.paths_considered;
    merged.stats.paths_feasible += plans[s].stats.paths_feasible;
    merged.stats.states += plans[s].stats.states;
    merged.stats.seconds += plans[s].stats.seconds;
  }
  merged.last_device = merged.placements.back().device;
  merged.objective = plan_objective(merged, problem);
  return merged;
}

// ---------------------------------------------------------------------------
// Auditor

Validation validate_plan(const DeploymentPlan& plan, const PlannerProblem& problem) {
  Validation v;
  auto fail = [&](std::string family, const std::string& what) {
    v.ok = false;
    v.violations.push_back(std::move(family) + ": " + what);
  };
  const auto& stages = problem.shape.stages;

  // Integrity.
  if (plan.placements.size() != stages.size()) {
    fail("integrity", "plan places " + std::to_string(plan.placements.size()) + " of " +
                          std::to_string(stages.size()) + " program stages");
  }
  if (plan.path_index < 0 || plan.path_index >= static_cast<int>(problem.paths.size())) {
    fail("integrity", "path index " + std::to_string(plan.path_index) + " is not a candidate path");
  } else if (problem.paths[static_cast<std::size_t>(plan.path_index)] != plan.path) {
    fail("integrity", "plan path differs from candidate path " + std::to_string(plan.path_index));
  }
  const std::size_t n = std::min(plan.placements.size(), stages.size());

  std::map<std::tuple<int, int, TableKind, int>, std::size_t> load;
  std::set<std::pair<int, int>> slots;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pl = plan.placements[i];
    const std::string at = "program stage " + std::to_string(i) + " on device " + std::to_string(pl.device) +
                           " stage " + std::to_string(pl.stage);
    if (pl.device < 0 || pl.device >= problem.capacity.device_count()) {
      fail("integrity", at + ": unknown device");
      continue;
    }
    if (position_on(plan.path, pl.device) == 0) fail("path", at + ": device is not on the chosen path");
    const auto& cfg = problem.capacity.config(pl.device);
    if (!cfg.programmable) fail("programmable", at + ": device is not programmable");
    if (pl.stage < 0 || pl.stage >= cfg.stage_count) {
      fail("resource", at + ": device has " + std::to_string(cfg.stage_count) + " stages");
      continue;
    }
    if (!slots.insert({pl.device, pl.stage}).second) {
      fail("integrity", at + ": device stage already holds another program stage");
    }
    for (const auto& t : stages[i].tables) {
      if (t.slot < 0 || t.slot >= cfg.slots(t.kind)) {
        fail("resource", at + ": no table slot " + std::string(to_string(t.kind)) + "[" +
                             std::to_string(t.slot) + "]");
        continue;
      }
      load[{pl.device, pl.stage, t.kind, t.slot}] += t.entries;
    }
  }
  for (const auto& [key, entries] : load) {
    const auto& [device, stage, kind, slot] = key;
    const std::size_t have = problem.capacity.used(device, stage, kind, slot);
    const std::size_t cap = problem.capacity.config(device).capacity(kind);
    if (have + entries > cap) {
      fail("resource", "device " + std::to_string(device) + " stage " + std::to_string(stage) + " table " +
                           std::string(to_string(kind)) + "[" + std::to_string(slot) + "] needs " +
                           std::to_string(have + entries) + " entries, capacity " + std::to_string(cap));
    }
  }

  // Dependency: positions never go back; same device means a later stage.
  for (std::size_t i = 1; i < n; ++i) {
    const auto& a = plan.placements[i - 1];
    const auto& b = plan.placements[i];
    const int pa = position_on(plan.path, a.device);
    const int pb = position_on(plan.path, b.device);
    if (pb < pa || (pb == pa && b.stage <= a.stage)) {
      fail("dependency", "program stage " + std::to_string(i) + " is not placed after program stage " +
                             std::to_string(i - 1));
    }
  }
  if (problem.start_after && n > 0) {
    const int pa = position_on(plan.path, problem.start_after->first);
    const int pb = position_on(plan.path, plan.placements[0].device);
    if (pa == 0 || pb < pa || (pb == pa && plan.placements[0].stage <= problem.start_after->second)) {
      fail("dependency", "program stage 0 does not follow the previous segment");
    }
  }

  // Co-location.
  std::map<int, int> group_device;
  for (std::size_t i = 0; i < n; ++i) {
    const int g = stages[i].group;
    if (g < 0) continue;
    auto [it, inserted] = group_device.emplace(g, plan.placements[i].device);
    if (!inserted && it->second != plan.placements[i].device) {
      fail("co-location", "group " + std::to_string(g) + " spans devices " + std::to_string(it->second) +
                              " and " + std::to_string(plan.placements[i].device));
    }
  }

  // Last stage.
  if (n > 0 && plan.last_device != plan.placements[n - 1].device) {
    fail("last-stage", "last device " + std::to_string(plan.last_device) + " does not host the final stage");
  }

  // Objective.
  if (v.ok) {
    const Objective o = plan_objective(plan, problem);
    const Objective x = objective(to_decision_vars(plan, problem), problem);
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); };
    if (!close(o.total, plan.objective.total) || !close(o.latency, plan.objective.latency) ||
        !close(o.devices, plan.objective.devices) || !close(o.overhead, plan.objective.overhead)) {
      fail("objective", "reported objective does not match the placement");
    }
    if (!close(o.total, x.total)) fail("objective", "decision-variable objective disagrees with plan objective");
  }
  return v;
}

// ---------------------------------------------------------------------------
// Plan file

using nlohmann::json;

std::string serialize_plan(const DeploymentPlan& plan) {
  json j;
  j["format_version"] = 1;
  j["path_index"] = plan.path_index;
  j["path"] = plan.path;
  json placements = json::array();
  for (std::size_t i = 0; i < plan.placements.size(); ++i) {
    placements.push_back({{"program_stage", i},
                          {"device", plan.placements[i].device},
                          {"device_stage", plan.placements[i].stage}});
  }
  j["placements"] = std::move(placements);
  j["last_device"] = plan.last_device;
  j["objective"] = {{"latency", plan.objective.latency},
                    {"devices", plan.objective.devices},
                    {"overhead", plan.objective.overhead},
                    {"total", plan.objective.total}};
  j["stats"] = {{"paths_considered", plan.stats.paths_considered},
                {"paths_feasible", plan.stats.paths_feasible},
                {"states", plan.stats.states},
                {"seconds", plan.stats.seconds}};
  return j.dump(1) + "\n";
}

DeploymentPlan parse_plan(std::string_view text) {
  DeploymentPlan plan;
  try {
    const json j = json::parse(text);
    if (j.at("format_version").get<int>() != 1) throw Error(ErrorCode::kParse, "unsupported plan format_version");
    plan.path_index = j.at("path_index").get<int>();
    plan.path = j.at("path").get<Path>();
    const auto& placements = j.at("placements");
    plan.placements.resize(placements.size());
    for (const auto& p : placements) {
      const auto i = p.at("program_stage").get<std::size_t>();
      if (i >= plan.placements.size()) throw Error(ErrorCode::kParse, "program_stage out of range");
      plan.placements[i] = Placement{p.at("device").get<int>(), p.at("device_stage").get<int>()};
    }
    plan.last_device = j.at("last_device").get<int>();
    const auto& o = j.at("objective");
    plan.objective = Objective{o.at("latency").get<double>(), o.at("devices").get<double>(),
                               o.at("overhead").get<double>(), o.at("total").get<double>()};
    if (j.contains("stats")) {
      const auto& s = j.at("stats");
      plan.stats.paths_considered = s.value("paths_considered", std::size_t{0});
      plan.stats.paths_feasible = s.value("paths_feasible", std::size_t{0});
      plan.stats.states = s.value("states", std::size_t{0});
      plan.stats.seconds = s.value("seconds", 0.0);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("plan file: ") + e.what());
  }
  return plan;
}

DeploymentPlan load_plan(const std::filesystem::path& path) { return parse_plan(detail::read_file(path)); }

void save_plan(const DeploymentPlan& plan, const std::filesystem::path& path) {
  detail::write_file(path, serialize_plan(plan));
}

}  // namespace innet
