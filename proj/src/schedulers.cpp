#include "eunsim/schedulers.hpp"

#include <algorithm>
#include <cmath>

#include "eunsim/parallel.hpp"
#include "eunsim/rng.hpp"

namespace eunsim {

namespace bpso_detail {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

double velocity_update(double v, double x, double p_best, double g_best,
                       const BpsoParams& params, double beta1, double beta2) {
  const double next = params.inertia * v + params.alpha1 * beta1 * (p_best - x) +
                      params.alpha2 * beta2 * (g_best - x);
  return std::clamp(next, -params.v_max, params.v_max);
}

}  // namespace bpso_detail

namespace {

using bpso_detail::sigmoid;

// Evaluate, repairing what the finish-time checks demand: a single-slot
// subtask overrunning its slot gains the next-slot replica; a subtask whose
// inputs can only arrive in slot 2 moves to slot 2 outright (the start anchor
// may not move). Each row changes at most twice, so this terminates. Shared
// by every solver.
ScheduleEvaluation evaluate_with_replica_repair(DecisionMatrix& x,
                                                const SchedulingInstance& inst,
                                                long& eval_count) {
  const int guard_max = 2 * inst.dag->size() + 1;
  for (int guard = 0; guard < guard_max; ++guard) {
    ScheduleEvaluation ev = compute_latency(x, *inst.dag, *inst.wteg, *inst.fleet);
    ++eval_count;
    if (ev.feasible) return ev;
    const int row = ev.offending_subtask;
    if (row < 0) return ev;
    const ReplicaSet place = decode_mapping(x, *inst.dag)
                                 .assignment[static_cast<std::size_t>(row)];
    if (ev.reason == InfeasibleReason::slot_overrun && !place.cross_slot &&
        place.first_slot == 0) {
      x.set(row, place.uav, 1, true);
      continue;
    }
    if (ev.reason == InfeasibleReason::unreachable_edge &&
        place.first_slot == 0 && row != inst.dag->source()) {
      x.clear_row(row);
      x.set(row, place.uav, 1, true);
      continue;
    }
    return ev;
  }
  ScheduleEvaluation ev = compute_latency(x, *inst.dag, *inst.wteg, *inst.fleet);
  ++eval_count;
  return ev;
}

void anchor_row(DecisionMatrix& x, int row, int uav, int slot) {
  x.clear_row(row);
  x.set(row, uav, slot, true);
}

SolverResult finish_result(DecisionMatrix x, ScheduleEvaluation ev, long evals,
                           std::vector<double> trace, const char* who) {
  if (!ev.feasible) {
    throw NoFeasibleSchedule(std::string(who) +
                             ": no rule-satisfying schedule fits the horizon");
  }
  SolverResult r;
  r.feasible = true;
  r.best = std::move(x);
  r.latency = ev.total;
  r.evaluation = std::move(ev);
  r.best_trace = std::move(trace);
  r.evaluations = evals;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// BPSO
// ---------------------------------------------------------------------------

namespace {

struct RowSpace {
  std::vector<int> eligible_cols;  // candidate base columns, ascending
  bool source = false;
  bool sink = false;
};

std::vector<RowSpace> build_row_spaces(const TaskDag& dag, int n) {
  std::vector<RowSpace> rs(static_cast<std::size_t>(dag.size()));
  for (int i = 0; i < dag.size(); ++i) {
    RowSpace& r = rs[static_cast<std::size_t>(i)];
    r.source = i == dag.source();
    r.sink = i == dag.sink();
    if (r.source) {
      r.eligible_cols = {0, n};  // initiator, either slot
    } else if (r.sink) {
      r.eligible_cols = {n - 1, 2 * n - 1};  // receiver, either slot
    } else {
      for (int c = 0; c < 2 * n; ++c) r.eligible_cols.push_back(c);
    }
  }
  return rs;
}

// Project one row of raw sigmoid-sampled bits onto a rule-satisfying row:
// keep the highest-probability eligible bit as the base placement (anchors
// forced for the starting subtask), and keep the same-UAV next-slot replica
// when it was sampled alongside a slot-1 base.
void repair_row(DecisionMatrix& x, int row, const RowSpace& space,
                const std::vector<double>& s_of_v, int n) {
  int base = -1;
  double best_s = -1.0;
  for (int c : space.eligible_cols) {
    if (x.get_col(row, c) && s_of_v[static_cast<std::size_t>(c)] > best_s) {
      best_s = s_of_v[static_cast<std::size_t>(c)];
      base = c;
    }
  }
  if (base < 0) {
    for (int c : space.eligible_cols) {
      if (s_of_v[static_cast<std::size_t>(c)] > best_s) {
        best_s = s_of_v[static_cast<std::size_t>(c)];
        base = c;
      }
    }
  }
  if (space.source) base = 0;  // rooted at the initiator in slot 1

  const bool want_replica = base < n && x.get_col(row, base + n);
  x.clear_row(row);
  x.set_col(row, base, true);
  if (want_replica) x.set_col(row, base + n, true);
}

}  // namespace

SolverResult bpso_solve(const SchedulingInstance& inst, const BpsoParams& params) {
  const TaskDag& dag = *inst.dag;
  const int l = dag.size();
  const int n = inst.wteg->uav_count();
  const int dims = l * 2 * n;
  const int swarm = params.swarm;
  if (swarm < 1 || params.iters < 0) {
    throw std::invalid_argument("bpso needs swarm >= 1 and iters >= 0");
  }
  const std::vector<RowSpace> spaces = build_row_spaces(dag, n);

  struct Particle {
    DecisionMatrix x;
    std::vector<double> v;
    DecisionMatrix p_best;
    double p_fit = kUnreachable;
    double fit = kUnreachable;
    long evals = 0;
  };
  std::vector<Particle> ps(static_cast<std::size_t>(swarm));

  // warm starts: the deterministic balancers give the swarm a feasible
  // anchor, so search begins at-or-below their latency instead of on the
  // flat infeasible plateau
  long warm_evals = 0;
  std::vector<DecisionMatrix> warm;
  for (int which = 0; which < 2; ++which) {
    try {
      DecisionMatrix x = which == 0 ? greedy_lb_solve(inst).best
                                    : wrr_solve(inst).best;
      warm_evals += inst.dag->size() + 1;  // upper bound on the repair loop
      warm.push_back(std::move(x));
    } catch (const NoFeasibleSchedule&) {
    }
  }

  // remaining particles: uniform over each row's option set
  for (int m = 0; m < swarm; ++m) {
    Particle& p = ps[static_cast<std::size_t>(m)];
    p.x = DecisionMatrix(l, n);
    p.v.assign(static_cast<std::size_t>(dims), 0.0);
    if (static_cast<std::size_t>(m) < warm.size()) {
      p.x = warm[static_cast<std::size_t>(m)];
      continue;
    }
    Rng rng(Rng::derive(params.seed, 0xB5011, static_cast<std::uint64_t>(m)));
    for (int i = 0; i < l; ++i) {
      const RowSpace& sp = spaces[static_cast<std::size_t>(i)];
      if (sp.source) {
        const bool cross = rng.uniform_int(2) == 1;
        anchor_row(p.x, i, 0, 0);
        if (cross) p.x.set(i, 0, 1, true);
      } else {
        // uniform over {slot-1, slot-1 + replica, slot-2} per eligible UAV
        const int uavs = sp.sink ? 1 : n;
        const std::uint64_t pick = rng.uniform_int(static_cast<std::uint64_t>(3 * uavs));
        const int uav = sp.sink ? n - 1 : static_cast<int>(pick / 3);
        const int pattern = static_cast<int>(pick % 3);
        anchor_row(p.x, i, uav, pattern == 2 ? 1 : 0);
        if (pattern == 1) p.x.set(i, uav, 1, true);
      }
    }
  }

  // evaluate the initial swarm (parallel kernel; particles independent)
  parallel_for(static_cast<std::size_t>(swarm), [&](std::size_t m) {
    Particle& p = ps[m];
    ScheduleEvaluation ev = evaluate_with_replica_repair(p.x, inst, p.evals);
    p.fit = ev.feasible ? ev.total : kUnreachable;
  });

  DecisionMatrix g_best;
  double g_fit = kUnreachable;
  for (int m = 0; m < swarm; ++m) {
    Particle& p = ps[static_cast<std::size_t>(m)];
    p.p_best = p.x;
    p.p_fit = p.fit;
    if (p.fit < g_fit) {
      g_fit = p.fit;
      g_best = p.x;
    }
  }

  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(params.iters) + 1);
  trace.push_back(g_fit);

  for (int iter = 1; iter <= params.iters; ++iter) {
    // move + evaluate every particle; per-particle RNG substreams make the
    // result independent of thread scheduling, g_best/p_best are read-only
    // until the reduction below
    const bool have_g = !is_unreachable(g_fit);
    parallel_for(static_cast<std::size_t>(swarm), [&](std::size_t m) {
      Particle& p = ps[m];
      Rng rng(Rng::derive(params.seed, 0xB502,
                          static_cast<std::uint64_t>(iter), m));
      std::vector<double> s_buf(static_cast<std::size_t>(dims));
      for (int d = 0; d < dims; ++d) {
        const double b1 = rng.uniform01();
        const double b2 = rng.uniform01();
        const int row = d / (2 * n);
        const int col = d % (2 * n);
        const double xd = p.x.get_col(row, col) ? 1.0 : 0.0;
        const double pd = p.p_best.get_col(row, col) ? 1.0 : 0.0;
        const double gd = have_g && g_best.get_col(row, col) ? 1.0 : 0.0;
        const double v = bpso_detail::velocity_update(
            p.v[static_cast<std::size_t>(d)], xd, pd, gd, params, b1, b2);
        p.v[static_cast<std::size_t>(d)] = v;
        s_buf[static_cast<std::size_t>(d)] = sigmoid(v);
        p.x.set_col(row, col, s_buf[static_cast<std::size_t>(d)] >= rng.uniform01());
      }
      std::vector<double> s_row(static_cast<std::size_t>(2 * n));
      for (int i = 0; i < l; ++i) {
        std::copy(s_buf.begin() + static_cast<long>(i) * 2 * n,
                  s_buf.begin() + static_cast<long>(i + 1) * 2 * n, s_row.begin());
        repair_row(p.x, i, spaces[static_cast<std::size_t>(i)], s_row, n);
      }
      ScheduleEvaluation ev = evaluate_with_replica_repair(p.x, inst, p.evals);
      p.fit = ev.feasible ? ev.total : kUnreachable;
    });

    // serial reduction: the per-iteration barrier that updates the bests
    for (int m = 0; m < swarm; ++m) {
      Particle& p = ps[static_cast<std::size_t>(m)];
      if (p.fit < p.p_fit) {
        p.p_fit = p.fit;
        p.p_best = p.x;
      }
      if (p.fit < g_fit) {
        g_fit = p.fit;
        g_best = p.x;
      }
    }
    trace.push_back(g_fit);
  }

  long total_evals = warm_evals;
  for (const Particle& p : ps) total_evals += p.evals;

  if (is_unreachable(g_fit)) {
    throw NoFeasibleSchedule("bpso: repair never produced a feasible particle");
  }
  ScheduleEvaluation final_ev =
      compute_latency(g_best, dag, *inst.wteg, *inst.fleet);
  return finish_result(std::move(g_best), std::move(final_ev), total_evals,
                       std::move(trace), "bpso");
}

// ---------------------------------------------------------------------------
// Load-balancing baselines
// ---------------------------------------------------------------------------

namespace {

std::vector<int> intermediate_rows(const TaskDag& dag) {
  std::vector<int> rows;
  for (int i : dag.topological_order()) {
    if (i != dag.source() && i != dag.sink()) rows.push_back(i);
  }
  return rows;
}

DecisionMatrix anchored_matrix(const TaskDag& dag, int n) {
  DecisionMatrix x(dag.size(), n);
  anchor_row(x, dag.source(), 0, 0);
  anchor_row(x, dag.sink(), n - 1, 0);
  return x;
}

}  // namespace

SolverResult wrr_solve(const SchedulingInstance& inst) {
  const TaskDag& dag = *inst.dag;
  const int n = inst.wteg->uav_count();
  const auto& cap = inst.fleet->capacity_hz;
  const double cap_min = *std::min_element(cap.begin(), cap.end());

  DecisionMatrix x = anchored_matrix(dag, n);
  // smooth weighted round robin: capacity-proportional weights
  std::vector<double> weight(cap.size());
  double weight_sum = 0.0;
  for (std::size_t d = 0; d < cap.size(); ++d) {
    weight[d] = cap[d] / cap_min;
    weight_sum += weight[d];
  }
  std::vector<double> credit(cap.size(), 0.0);
  for (int row : intermediate_rows(dag)) {
    int pick = 0;
    for (std::size_t d = 0; d < cap.size(); ++d) {
      credit[d] += weight[d];
      if (credit[d] > credit[static_cast<std::size_t>(pick)]) {
        pick = static_cast<int>(d);
      }
    }
    credit[static_cast<std::size_t>(pick)] -= weight_sum;
    anchor_row(x, row, pick, 0);
  }

  long evals = 0;
  ScheduleEvaluation ev = evaluate_with_replica_repair(x, inst, evals);
  return finish_result(std::move(x), std::move(ev), evals, {}, "wrr");
}

SolverResult greedy_lb_solve(const SchedulingInstance& inst) {
  const TaskDag& dag = *inst.dag;
  const int n = inst.wteg->uav_count();
  const auto& cap = inst.fleet->capacity_hz;

  DecisionMatrix x = anchored_matrix(dag, n);
  // load metric: compute seconds this balancer has assigned so far (the
  // anchored endpoints are constraints, not load it placed)
  std::vector<double> load(cap.size(), 0.0);
  auto charge = [&](int row, int uav) {
    const Subtask& s = dag.node(row);
    load[static_cast<std::size_t>(uav)] +=
        s.cycles * s.xi / cap[static_cast<std::size_t>(uav)];
  };
  for (int row : intermediate_rows(dag)) {
    int pick = 0;
    for (int d = 1; d < n; ++d) {
      if (load[static_cast<std::size_t>(d)] < load[static_cast<std::size_t>(pick)]) {
        pick = d;
      }
    }
    anchor_row(x, row, pick, 0);
    charge(row, pick);
  }

  long evals = 0;
  ScheduleEvaluation ev = evaluate_with_replica_repair(x, inst, evals);
  return finish_result(std::move(x), std::move(ev), evals, {}, "greedy-lb");
}

SolverResult pick_kx_solve(const SchedulingInstance& inst, std::uint64_t seed) {
  const TaskDag& dag = *inst.dag;
  const int n = inst.wteg->uav_count();
  DecisionMatrix x = anchored_matrix(dag, n);
  Rng rng(Rng::derive(seed, 0x91CC));
  for (int row : intermediate_rows(dag)) {
    anchor_row(x, row, static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n))), 0);
  }
  long evals = 0;
  ScheduleEvaluation ev = evaluate_with_replica_repair(x, inst, evals);
  return finish_result(std::move(x), std::move(ev), evals, {}, "pick-kx");
}

// ---------------------------------------------------------------------------
// Architecture baselines
// ---------------------------------------------------------------------------

ArchitectureLatency local_latency(const TaskDag& dag, double initiator_capacity_hz) {
  ArchitectureLatency r;
  for (int i = 0; i < dag.size(); ++i) {
    const Subtask& s = dag.node(i);
    r.compute += s.cycles * s.xi / initiator_capacity_hz;
  }
  r.total = r.compute;
  return r;
}

ArchitectureLatency cloud_latency(const TaskDag& dag, const CloudParams& cloud) {
  ArchitectureLatency r;
  r.uplink = dag.node(dag.source()).data_bits / cloud.backhaul_bps;
  for (int i = 0; i < dag.size(); ++i) {
    const Subtask& s = dag.node(i);
    r.compute += s.cycles * s.xi / cloud.capacity_hz;
  }
  const Subtask& sink = dag.node(dag.sink());
  r.downlink = sink.data_bits * sink.xi / cloud.backhaul_bps;
  r.total = r.uplink + r.compute + r.downlink;
  return r;
}

}  // namespace eunsim
