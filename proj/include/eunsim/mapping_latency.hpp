#pragma once

#include <cstdint>
#include <vector>

#include "eunsim/channel_wteg.hpp"
#include "eunsim/task_dag.hpp"

namespace eunsim {

// Binary subtask-to-(UAV, slot) assignment, l rows by 2N columns. Column
// layout follows the expanded-graph node order: slot-0 UAVs first, then
// slot-1 UAVs (column = slot * N + uav).
class DecisionMatrix {
 public:
  DecisionMatrix() = default;
  DecisionMatrix(int subtasks, int uavs)
      : rows_(subtasks), uavs_(uavs),
        bits_(static_cast<std::size_t>(subtasks * 2 * uavs), 0) {}

  int rows() const { return rows_; }
  int uav_count() const { return uavs_; }
  int cols() const { return 2 * uavs_; }

  bool get(int row, int uav, int slot) const {
    return bits_[flat(row, slot * uavs_ + uav)] != 0;
  }
  void set(int row, int uav, int slot, bool v = true) {
    bits_[flat(row, slot * uavs_ + uav)] = v ? 1 : 0;
  }
  bool get_col(int row, int col) const { return bits_[flat(row, col)] != 0; }
  void set_col(int row, int col, bool v) { bits_[flat(row, col)] = v ? 1 : 0; }
  void clear_row(int row) {
    for (int c = 0; c < cols(); ++c) bits_[flat(row, c)] = 0;
  }

  friend bool operator==(const DecisionMatrix&, const DecisionMatrix&) = default;

 private:
  std::size_t flat(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols()) +
           static_cast<std::size_t>(c);
  }
  int rows_ = 0;
  int uavs_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Per-UAV computing capacity in cycles/s, fixed for both slots.
struct FleetCompute {
  std::vector<double> capacity_hz;
  int uav_count() const { return static_cast<int>(capacity_hz.size()); }
};

enum class MappingError {
  none,
  row_sum_invalid,        // row sum not in {1, 2}
  replica_not_same_uav,   // two replicas on different UAVs or same slot
  horizon_exceeded,       // replica chain runs past the two-slot horizon
  start_anchor,           // starting subtask not rooted at u_1 in slot 1
  terminal_anchor,        // terminal subtask not on u_N
};

// Replica placement of one subtask: the UAV, the first slot occupied, and
// whether it also holds the next-slot replica. start() is where inputs must
// arrive, end() is where the output becomes available.
struct ReplicaSet {
  int uav = 0;
  int first_slot = 0;
  bool cross_slot = false;

  NodeRef start() const { return {uav, first_slot}; }
  NodeRef end() const { return {uav, cross_slot ? first_slot + 1 : first_slot}; }
};

struct DecodeResult {
  std::vector<ReplicaSet> assignment;
  MappingError error = MappingError::none;
  int error_row = -1;
  bool ok() const { return error == MappingError::none; }
};

// Validates the mapping rules (anchors, row sums, same-UAV replicas, horizon)
// and extracts the replica placement per subtask. Never throws; the error
// code identifies the violated rule. The task initiator is UAV 0 and the
// result receiver is UAV N-1.
DecodeResult decode_mapping(const DecisionMatrix& x, const TaskDag& dag);

// Shortest static path per DAG edge, weighted by the producing subtask's
// output payload D_i * xi_i. Evaluation uses the departure-time-aware search
// instead; this view backs reports and the path oracle tests.
struct EdgePath {
  int from = 0;  // dag node indices
  int to = 0;
  WtegGraph::PathResult path;
};
std::vector<EdgePath> map_edges(const std::vector<ReplicaSet>& assignment,
                                const TaskDag& dag, const WtegGraph& wteg);

enum class InfeasibleReason {
  none,
  rule_violation,     // decode failed
  unreachable_edge,   // no path for a DAG edge within the horizon
  slot_overrun,       // single-slot subtask cannot finish inside its slot
  horizon_overrun,    // work runs past the end of slot 2
  not_propagated,     // dag has no data sizes yet
};

struct SubtaskTiming {
  ReplicaSet placement;
  double t_comp = 0.0;   // compute seconds
  double t_accu = 0.0;   // completion minus compute: start epoch
  double t_total = 0.0;  // absolute completion epoch
  double output_ready = 0.0;  // epoch the output is available at end()
};

struct EvaluatedEdge {
  int from = 0;
  int to = 0;
  double depart = 0.0;
  double arrive = 0.0;
  std::vector<NodeRef> nodes;
};

// Full evaluation of one schedule against a graph: per-subtask timing, the
// realized transmission paths, cache crossings and the end-to-end latency
// (the terminal subtask's completion).
struct ScheduleEvaluation {
  bool feasible = false;
  InfeasibleReason reason = InfeasibleReason::none;
  int offending_subtask = -1;
  double total = kUnreachable;
  std::vector<SubtaskTiming> per_subtask;
  std::vector<EvaluatedEdge> edge_paths;
  std::vector<CacheEvent> cache_events;
};

// The latency model. Semantics, fixed here and mirrored by the independent
// test oracle:
//  - compute time per subtask is D_i * delta_i * xi_i / capacity;
//  - a subtask starts once all predecessor payloads have arrived at its
//    start() node and the UAV is free; co-located subtasks run sequentially
//    in topological order (one CPU per UAV);
//  - transmissions must fit inside a slot window; crossing the boundary goes
//    through the same-UAV cache edge and costs the residual slot time;
//  - a single-slot subtask must finish inside its slot, a cross-slot one may
//    straddle the boundary; if it finishes early its output is held at the
//    next-slot replica until the boundary;
//  - everything must finish by the end of slot 2.
ScheduleEvaluation compute_latency(const DecisionMatrix& x, const TaskDag& dag,
                                   const WtegGraph& wteg,
                                   const FleetCompute& fleet);

// Exhaustive enumeration of every rule-satisfying decision matrix, with its
// evaluation. Only sensible for toy instances; the bound guards against
// combinatorial blowups. This is the optimality oracle for the solver tests.
struct EnumerationResult {
  std::vector<DecisionMatrix> matrices;
  std::vector<ScheduleEvaluation> evaluations;
  int best_index = -1;  // argmin total among feasible; -1 if none feasible
};
EnumerationResult enumerate_feasible(const TaskDag& dag, const WtegGraph& wteg,
                                     const FleetCompute& fleet,
                                     int max_subtasks = 5, int max_uavs = 4);

}  // namespace eunsim
