#include "eunsim/mapping_latency.hpp"

#include <algorithm>
#include <stdexcept>

namespace eunsim {

DecodeResult decode_mapping(const DecisionMatrix& x, const TaskDag& dag) {
  DecodeResult out;
  const int l = dag.size();
  const int n = x.uav_count();
  if (x.rows() != l) {
    out.error = MappingError::row_sum_invalid;
    out.error_row = 0;
    return out;
  }
  out.assignment.resize(static_cast<std::size_t>(l));

  for (int i = 0; i < l; ++i) {
    std::vector<NodeRef> set_bits;
    for (int k = 0; k < 2; ++k) {
      for (int d = 0; d < n; ++d) {
        if (x.get(i, d, k)) set_bits.push_back({d, k});
      }
    }
    auto fail = [&](MappingError e) {
      out.error = e;
      out.error_row = i;
      return out;
    };
    if (set_bits.empty() || set_bits.size() > 2) {
      return fail(MappingError::row_sum_invalid);
    }
    ReplicaSet rs;
    if (set_bits.size() == 1) {
      rs = {set_bits[0].uav, set_bits[0].slot, false};
    } else {
      if (set_bits[0].uav != set_bits[1].uav) {
        return fail(MappingError::replica_not_same_uav);
      }
      // column order guarantees slot 0 first
      rs = {set_bits[0].uav, set_bits[0].slot, true};
      if (rs.first_slot + 1 > 1) {
        return fail(MappingError::horizon_exceeded);
      }
    }
    if (i == dag.source()) {
      // the starting subtask is rooted at the task initiator in slot 1
      if (rs.uav != 0 || rs.first_slot != 0) {
        return fail(MappingError::start_anchor);
      }
    }
    if (i == dag.sink()) {
      // the terminal subtask stays on the result receiver
      if (rs.uav != n - 1) {
        return fail(MappingError::terminal_anchor);
      }
    }
    out.assignment[static_cast<std::size_t>(i)] = rs;
  }
  return out;
}

std::vector<EdgePath> map_edges(const std::vector<ReplicaSet>& assignment,
                                const TaskDag& dag, const WtegGraph& wteg) {
  std::vector<EdgePath> out;
  out.reserve(dag.edges().size());
  for (const DagEdge& e : dag.edges()) {
    const ReplicaSet& src = assignment[static_cast<std::size_t>(e.from)];
    const ReplicaSet& dst = assignment[static_cast<std::size_t>(e.to)];
    const double payload = dag.node(e.from).data_bits * dag.node(e.from).xi;
    EdgePath ep;
    ep.from = e.from;
    ep.to = e.to;
    ep.path = wteg.shortest_path(src.end(), dst.start(), payload);
    out.push_back(std::move(ep));
  }
  return out;
}

ScheduleEvaluation compute_latency(const DecisionMatrix& x, const TaskDag& dag,
                                   const WtegGraph& wteg,
                                   const FleetCompute& fleet) {
  ScheduleEvaluation ev;
  if (!dag.propagated()) {
    ev.reason = InfeasibleReason::not_propagated;
    return ev;
  }
  const DecodeResult decoded = decode_mapping(x, dag);
  if (!decoded.ok()) {
    ev.reason = InfeasibleReason::rule_violation;
    ev.offending_subtask = decoded.error_row;
    return ev;
  }
  if (fleet.uav_count() != wteg.uav_count()) {
    throw std::invalid_argument("fleet capacity count does not match graph");
  }

  const double slot = wteg.slot_duration();
  const double horizon = 2.0 * slot;
  const int l = dag.size();
  ev.per_subtask.resize(static_cast<std::size_t>(l));

  // one CPU per UAV: next instant the UAV is free
  std::vector<double> uav_free(static_cast<std::size_t>(wteg.uav_count()), 0.0);

  for (int i : dag.topological_order()) {
    const ReplicaSet place = decoded.assignment[static_cast<std::size_t>(i)];
    SubtaskTiming& tim = ev.per_subtask[static_cast<std::size_t>(i)];
    tim.placement = place;

    // latest predecessor payload arrival at this subtask's start node
    double inputs_ready = place.first_slot == 0 ? 0.0 : slot;
    for (int j : dag.predecessors(i)) {
      const SubtaskTiming& pj = ev.per_subtask[static_cast<std::size_t>(j)];
      const ReplicaSet& pp = pj.placement;
      const double payload = dag.node(j).data_bits * dag.node(j).xi;
      const auto hop = wteg.earliest_arrival(pp.end(), pj.output_ready,
                                             place.start(), payload);
      if (!hop.reachable()) {
        ev.reason = InfeasibleReason::unreachable_edge;
        ev.offending_subtask = i;
        return ev;
      }
      ev.edge_paths.push_back({j, i, pj.output_ready, hop.arrival, hop.nodes});
      for (const CacheEvent& ce : hop.cache_events) ev.cache_events.push_back(ce);
      inputs_ready = std::max(inputs_ready, hop.arrival);
    }

    const Subtask& sub = dag.node(i);
    const double capacity = fleet.capacity_hz[static_cast<std::size_t>(place.uav)];
    // D_i * delta_i * xi_i / capacity, with C_i = D_i * delta_i
    tim.t_comp = sub.cycles * sub.xi / capacity;

    const double start = std::max(inputs_ready,
                                  uav_free[static_cast<std::size_t>(place.uav)]);
    const double finish = start + tim.t_comp;

    // a single-slot subtask must fit inside its slot window
    const double own_slot_end = place.first_slot == 0 ? slot : horizon;
    if (!place.cross_slot && finish > own_slot_end + 1.0e-12) {
      ev.reason = place.first_slot == 0 ? InfeasibleReason::slot_overrun
                                        : InfeasibleReason::horizon_overrun;
      ev.offending_subtask = i;
      return ev;
    }
    if (finish > horizon + 1.0e-12) {
      ev.reason = InfeasibleReason::horizon_overrun;
      ev.offending_subtask = i;
      return ev;
    }

    uav_free[static_cast<std::size_t>(place.uav)] = finish;
    tim.t_total = finish;
    tim.t_accu = start;

    // output lives at end(); crossing declared but finished early means the
    // data is buffered on the node until the boundary
    if (place.cross_slot && finish < slot) {
      tim.output_ready = slot;
      ev.cache_events.push_back({place.uav, finish, slot - finish});
    } else {
      tim.output_ready = finish;
    }
  }

  ev.feasible = true;
  ev.reason = InfeasibleReason::none;
  ev.total = ev.per_subtask[static_cast<std::size_t>(dag.sink())].t_total;
  return ev;
}

namespace {

// per-row placement options in a fixed deterministic order
std::vector<ReplicaSet> row_options(int row, const TaskDag& dag, int n) {
  std::vector<ReplicaSet> opts;
  if (row == dag.source()) {
    opts.push_back({0, 0, false});
    opts.push_back({0, 0, true});
    return opts;
  }
  const bool is_sink = row == dag.sink();
  for (int d = 0; d < n; ++d) {
    if (is_sink && d != n - 1) continue;
    opts.push_back({d, 0, false});
    opts.push_back({d, 0, true});
    opts.push_back({d, 1, false});
  }
  return opts;
}

void apply_placement(DecisionMatrix& x, int row, const ReplicaSet& rs) {
  x.clear_row(row);
  x.set(row, rs.uav, rs.first_slot, true);
  if (rs.cross_slot) x.set(row, rs.uav, rs.first_slot + 1, true);
}

}  // namespace

EnumerationResult enumerate_feasible(const TaskDag& dag, const WtegGraph& wteg,
                                     const FleetCompute& fleet, int max_subtasks,
                                     int max_uavs) {
  const int l = dag.size();
  const int n = wteg.uav_count();
  if (l > max_subtasks || n > max_uavs) {
    throw std::invalid_argument("instance too large for exhaustive enumeration");
  }

  std::vector<std::vector<ReplicaSet>> options;
  options.reserve(static_cast<std::size_t>(l));
  for (int i = 0; i < l; ++i) options.push_back(row_options(i, dag, n));

  EnumerationResult out;
  DecisionMatrix x(l, n);
  std::vector<std::size_t> choice(static_cast<std::size_t>(l), 0);
  double best = kUnreachable;

  while (true) {
    for (int i = 0; i < l; ++i) {
      apply_placement(x, i, options[static_cast<std::size_t>(i)]
                                   [choice[static_cast<std::size_t>(i)]]);
    }
    ScheduleEvaluation ev = compute_latency(x, dag, wteg, fleet);
    if (ev.feasible && ev.total < best) {
      best = ev.total;
      out.best_index = static_cast<int>(out.matrices.size());
    }
    out.matrices.push_back(x);
    out.evaluations.push_back(std::move(ev));

    // odometer increment
    int pos = l - 1;
    while (pos >= 0) {
      auto& c = choice[static_cast<std::size_t>(pos)];
      if (++c < options[static_cast<std::size_t>(pos)].size()) break;
      c = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

}  // namespace eunsim
