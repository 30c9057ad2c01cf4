#include "eunsim/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "eunsim/parallel.hpp"
#include "eunsim/rng.hpp"

namespace eunsim {

namespace {

constexpr double kBoundaryTol = 1.0e-12;

double mbit(double bits) { return bits / 1.0e6; }

TaskDag propagated_dag(const Scenario& sc, double d_source_bits,
                       double delta_multiplier) {
  TaskDag dag = sc.load_task_dag();
  dag.propagate_data_sizes(d_source_bits, sc.task.delta_cpb,
                           sc.task.delta_multiplier * delta_multiplier);
  return dag;
}

}  // namespace

ExecutionOutcome replay_schedule(const ScheduleEvaluation& committed,
                                 const TaskDag& dag, const WtegGraph& realized,
                                 const FleetCompute& fleet,
                                 const std::vector<std::uint8_t>* dead_slot2_links) {
  ExecutionOutcome out;
  if (!committed.feasible) return out;

  const double slot = realized.slot_duration();
  const double horizon = 2.0 * slot;
  const int l = dag.size();

  // committed per-edge paths, keyed by dag edge
  std::map<std::pair<int, int>, const EvaluatedEdge*> paths;
  for (const EvaluatedEdge& e : committed.edge_paths) {
    paths[{e.from, e.to}] = &e;
  }

  std::vector<double> finish(static_cast<std::size_t>(l), 0.0);
  std::vector<double> output_ready(static_cast<std::size_t>(l), 0.0);
  std::vector<double> uav_free(static_cast<std::size_t>(realized.uav_count()), 0.0);

  for (int i : dag.topological_order()) {
    const ReplicaSet place =
        committed.per_subtask[static_cast<std::size_t>(i)].placement;
    double inputs_ready = place.first_slot == 0 ? 0.0 : slot;

    for (int j : dag.predecessors(i)) {
      const auto it = paths.find({j, i});
      if (it == paths.end()) return out;  // committed evaluation incomplete
      const EvaluatedEdge& path = *it->second;
      const double payload = dag.node(j).data_bits * dag.node(j).xi;

      // walk the committed hops on realized weights
      double t = output_ready[static_cast<std::size_t>(j)];
      for (std::size_t h = 0; h + 1 < path.nodes.size(); ++h) {
        const NodeRef a = path.nodes[h];
        const NodeRef b = path.nodes[h + 1];
        if (a.slot == b.slot) {
          const double pb = realized.per_bit(a.uav, b.uav, a.slot);
          const bool masked_dead =
              a.slot == 1 && dead_slot2_links &&
              (*dead_slot2_links)[static_cast<std::size_t>(
                  a.uav * realized.uav_count() + b.uav)] != 0;
          if (is_unreachable(pb) || masked_dead) {
            out.failed_edge_from = j;
            out.failed_edge_to = i;
            return out;  // committed link does not exist in reality
          }
          const double tx = payload == 0.0 ? 0.0 : pb * payload;
          const double slot_end = a.slot == 0 ? slot : horizon;
          if (t + tx > slot_end + kBoundaryTol) {
            out.failed_edge_from = j;
            out.failed_edge_to = i;
            return out;  // transfer no longer fits its slot window
          }
          t += tx;
        } else {
          t = slot;  // cache edge releases at the boundary
        }
      }
      inputs_ready = std::max(inputs_ready, t);
    }

    const Subtask& sub = dag.node(i);
    const double t_comp =
        sub.cycles * sub.xi / fleet.capacity_hz[static_cast<std::size_t>(place.uav)];
    const double start =
        std::max(inputs_ready, uav_free[static_cast<std::size_t>(place.uav)]);
    const double fin = start + t_comp;
    const double own_end = place.cross_slot || place.first_slot == 1 ? horizon : slot;
    if (fin > own_end + kBoundaryTol) {
      out.failed_edge_from = i;
      out.failed_edge_to = i;
      return out;
    }
    uav_free[static_cast<std::size_t>(place.uav)] = fin;
    finish[static_cast<std::size_t>(i)] = fin;
    output_ready[static_cast<std::size_t>(i)] =
        place.cross_slot && fin < slot ? slot : fin;
  }

  out.success = true;
  out.finish = finish[static_cast<std::size_t>(dag.sink())];
  return out;
}

int count_slot2_links(const ScheduleEvaluation& committed) {
  std::set<std::pair<int, int>> links;
  for (const EvaluatedEdge& e : committed.edge_paths) {
    for (std::size_t h = 0; h + 1 < e.nodes.size(); ++h) {
      const NodeRef a = e.nodes[h];
      const NodeRef b = e.nodes[h + 1];
      if (a.slot == 1 && b.slot == 1 && a.uav != b.uav) {
        links.insert({std::min(a.uav, b.uav), std::max(a.uav, b.uav)});
      }
    }
  }
  return static_cast<int>(links.size());
}

SolverResult run_solver(const Scenario& sc, const std::string& kind,
                        const TaskDag& dag, const WtegGraph& graph,
                        const FleetCompute& fleet, std::uint64_t seed) {
  const SchedulingInstance inst{&dag, &graph, &fleet};
  if (kind == "bpso") {
    BpsoParams p = sc.solver;
    p.seed = seed;
    return bpso_solve(inst, p);
  }
  if (kind == "wrr") return wrr_solve(inst);
  if (kind == "greedy-lb") return greedy_lb_solve(inst);
  if (kind == "pick-kx") return pick_kx_solve(inst, seed);
  throw ConfigError("unknown solver kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// runners
// ---------------------------------------------------------------------------

namespace {

std::vector<Cell> row_prefix(const Scenario& sc) {
  return {sc.name, hash_hex(sc.content_hash),
          static_cast<long long>(sc.seed)};
}

std::vector<double> default_sweep(const Scenario& sc) {
  if (!sc.experiment.d_sweep_bits.empty()) return sc.experiment.d_sweep_bits;
  std::vector<double> bits;
  for (double mb = 0.0; mb <= 5.0 + 1.0e-9; mb += 1.0) bits.push_back(mb * 1.0e6);
  return bits;
}

}  // namespace

ResultTable run_latency_vs_datasize(const Scenario& sc) {
  const BuiltFleet fleet = build_fleet(sc);
  const WtegGraph graph = predicted_graph(sc, fleet);
  const std::vector<double> sweep = default_sweep(sc);

  ResultTable t;
  t.kind = "data-size";
  t.header = {"scenario", "scenario_hash", "seed",     "d_source_mbit",
              "strategy", "latency_s",     "uplink_s", "compute_s",
              "downlink_s", "evaluations",  "status"};

  struct PointResult {
    double collab = kUnreachable;
    long evals = 0;
    std::string status = "ok";
  };
  std::vector<PointResult> collab(sweep.size());

  parallel_for(sweep.size(), [&](std::size_t pi) {
    const TaskDag dag = propagated_dag(sc, sweep[pi], 1.0);
    try {
      const SolverResult r =
          run_solver(sc, sc.solver_kind, dag, graph, fleet.capacities,
                     Rng::derive(sc.seed, 0xDA7A, pi));
      collab[pi].collab = r.latency;
      collab[pi].evals = r.evaluations;
    } catch (const NoFeasibleSchedule&) {
      collab[pi].status = "infeasible";
    }
  });

  for (std::size_t pi = 0; pi < sweep.size(); ++pi) {
    const TaskDag dag = propagated_dag(sc, sweep[pi], 1.0);
    const ArchitectureLatency local =
        local_latency(dag, fleet.capacities.capacity_hz[0]);
    const ArchitectureLatency cloud = cloud_latency(dag, sc.cloud);

    auto emit = [&](const std::string& strategy, double total, double up,
                    double comp, double down, long evals,
                    const std::string& status) {
      auto row = row_prefix(sc);
      row.insert(row.end(), {mbit(sweep[pi]), strategy, total, up, comp, down,
                             static_cast<long long>(evals), status});
      t.add_row(std::move(row));
    };
    emit("local", local.total, 0.0, local.compute, 0.0, 1, "ok");
    emit("cloud", cloud.total, cloud.uplink, cloud.compute, cloud.downlink, 1,
         "ok");
    emit("collaborative", collab[pi].collab, 0.0, 0.0, 0.0, collab[pi].evals,
         collab[pi].status);
  }
  return t;
}

ResultTable run_latency_vs_complexity(const Scenario& sc) {
  const BuiltFleet fleet = build_fleet(sc);
  const WtegGraph graph = predicted_graph(sc, fleet);
  const std::vector<double> sweep = default_sweep(sc);
  std::vector<double> mults = sc.experiment.complexity_multipliers;
  if (mults.empty()) {
    for (double m = 0.2; m <= 1.8 + 1.0e-9; m += 0.2) mults.push_back(m);
  }

  ResultTable t;
  t.kind = "complexity";
  t.header = {"scenario",   "scenario_hash",    "seed",
              "d_source_mbit", "delta_multiplier", "latency_s",
              "cache_crossings", "min_cache_residual_s", "evaluations",
              "status"};

  struct Point {
    double latency = kUnreachable;
    int crossings = 0;
    double min_residual = 0.0;
    long evals = 0;
    std::string status = "ok";
  };
  const std::size_t total = sweep.size() * mults.size();
  std::vector<Point> points(total);

  parallel_for(total, [&](std::size_t idx) {
    const std::size_t di = idx / mults.size();
    const std::size_t mi = idx % mults.size();
    const TaskDag dag = propagated_dag(sc, sweep[di], mults[mi]);
    Point& p = points[idx];
    try {
      const SolverResult r =
          run_solver(sc, sc.solver_kind, dag, graph, fleet.capacities,
                     Rng::derive(sc.seed, 0xC0F, idx));
      p.latency = r.latency;
      p.evals = r.evaluations;
      p.crossings = static_cast<int>(r.evaluation.cache_events.size());
      double min_res = kUnreachable;
      for (const CacheEvent& ce : r.evaluation.cache_events) {
        min_res = std::min(min_res, ce.delay);
      }
      p.min_residual = p.crossings > 0 ? min_res : 0.0;
    } catch (const NoFeasibleSchedule&) {
      p.status = "infeasible";
    }
  });

  for (std::size_t di = 0; di < sweep.size(); ++di) {
    for (std::size_t mi = 0; mi < mults.size(); ++mi) {
      const Point& p = points[di * mults.size() + mi];
      auto row = row_prefix(sc);
      row.insert(row.end(),
                 {mbit(sweep[di]), mults[mi], p.latency,
                  static_cast<long long>(p.crossings), p.min_residual,
                  static_cast<long long>(p.evals), p.status});
      t.add_row(std::move(row));
    }
  }
  return t;
}

ResultTable run_algorithm_comparison(const Scenario& sc) {
  const BuiltFleet fleet = build_fleet(sc);
  const WtegGraph graph = predicted_graph(sc, fleet);
  const std::vector<double> sweep = default_sweep(sc);
  const std::vector<std::string> algs{"bpso", "wrr", "greedy-lb", "pick-kx"};
  const int reps = sc.experiment.seeds;

  struct Run {
    double latency = kUnreachable;
    bool ok = false;
  };
  const std::size_t total = sweep.size() * algs.size() * static_cast<std::size_t>(reps);
  std::vector<Run> runs(total);

  parallel_for(total, [&](std::size_t idx) {
    const std::size_t di = idx / (algs.size() * static_cast<std::size_t>(reps));
    const std::size_t rest = idx % (algs.size() * static_cast<std::size_t>(reps));
    const std::size_t ai = rest / static_cast<std::size_t>(reps);
    const std::size_t rep = rest % static_cast<std::size_t>(reps);
    const TaskDag dag = propagated_dag(sc, sweep[di], 1.0);
    try {
      const SolverResult r =
          run_solver(sc, algs[ai], dag, graph, fleet.capacities,
                     Rng::derive(sc.seed, 0xA19, di, rep));
      runs[idx] = {r.latency, true};
    } catch (const NoFeasibleSchedule&) {
      runs[idx] = {kUnreachable, false};
    }
  });

  ResultTable t;
  t.kind = "algorithms";
  t.header = {"scenario", "scenario_hash", "seed", "d_source_mbit", "algorithm",
              "runs", "mean_latency_s", "std_latency_s", "min_latency_s",
              "max_latency_s", "improvement_vs_bpso_pct", "failed_runs"};

  for (std::size_t di = 0; di < sweep.size(); ++di) {
    double bpso_mean = kUnreachable;
    std::vector<std::array<double, 5>> stats(algs.size());  // mean,std,min,max,failed
    for (std::size_t ai = 0; ai < algs.size(); ++ai) {
      double sum = 0.0, sum2 = 0.0, mn = kUnreachable, mx = 0.0;
      int ok = 0, failed = 0;
      for (int rep = 0; rep < reps; ++rep) {
        const Run& r = runs[di * algs.size() * static_cast<std::size_t>(reps) +
                            ai * static_cast<std::size_t>(reps) +
                            static_cast<std::size_t>(rep)];
        if (!r.ok) {
          ++failed;
          continue;
        }
        ++ok;
        sum += r.latency;
        sum2 += r.latency * r.latency;
        mn = std::min(mn, r.latency);
        mx = std::max(mx, r.latency);
      }
      const double mean = ok ? sum / ok : kUnreachable;
      const double var = ok ? std::max(0.0, sum2 / ok - mean * mean) : 0.0;
      stats[ai] = {mean, std::sqrt(var), mn, mx, static_cast<double>(failed)};
      if (algs[ai] == "bpso") bpso_mean = mean;
    }
    for (std::size_t ai = 0; ai < algs.size(); ++ai) {
      const auto& s = stats[ai];
      const double improvement =
          !is_unreachable(bpso_mean) && !is_unreachable(s[0]) && s[0] > 0.0
              ? (s[0] - bpso_mean) / s[0] * 100.0
              : 0.0;
      auto row = row_prefix(sc);
      row.insert(row.end(),
                 {mbit(sweep[di]), algs[ai], static_cast<long long>(reps), s[0],
                  s[1], s[2], s[3], improvement,
                  static_cast<long long>(static_cast<long>(s[4]))});
      t.add_row(std::move(row));
    }
  }
  return t;
}

ResultTable run_success_rate(const Scenario& sc) {
  const BuiltFleet fleet = build_fleet(sc);
  const WtegGraph sins_graph = predicted_graph(sc, fleet);
  const WtegGraph blind_graph = persistence_graph(sc, fleet);
  const WtegGraph truth = realized_graph(sc, fleet);
  const std::vector<double> sweep = default_sweep(sc);
  const int trials = sc.experiment.trials;
  const bool bernoulli = sc.experiment.no_sins_model == "bernoulli";

  ResultTable t;
  t.kind = "success-rate";
  t.header = {"scenario", "scenario_hash", "seed", "d_source_mbit", "strategy",
              "trials", "successes", "success_rate_pct", "slot2_links",
              "expected_rate_pct", "status"};

  struct Point {
    long long sins_successes = 0;
    long long blind_successes = 0;
    int blind_links = 0;
    int sins_links = 0;
    bool sins_ok = false;
    bool blind_ok = false;
  };
  std::vector<Point> points(sweep.size());

  for (std::size_t pi = 0; pi < sweep.size(); ++pi) {
    const TaskDag dag = propagated_dag(sc, sweep[pi], 1.0);
    Point& p = points[pi];

    SolverResult sins_sched, blind_sched;
    try {
      sins_sched = run_solver(sc, sc.solver_kind, dag, sins_graph,
                              fleet.capacities, Rng::derive(sc.seed, 0x5A, pi));
      p.sins_ok = true;
      p.sins_links = count_slot2_links(sins_sched.evaluation);
    } catch (const NoFeasibleSchedule&) {
    }
    try {
      blind_sched = run_solver(sc, sc.solver_kind, dag, blind_graph,
                               fleet.capacities, Rng::derive(sc.seed, 0x5B, pi));
      p.blind_ok = true;
      p.blind_links = count_slot2_links(blind_sched.evaluation);
    } catch (const NoFeasibleSchedule&) {
    }

    // prediction-based execution always faces the true slot-2 topology
    if (p.sins_ok) {
      const ExecutionOutcome base =
          replay_schedule(sins_sched.evaluation, dag, truth, fleet.capacities);
      p.sins_successes = base.success ? trials : 0;
    }

    if (p.blind_ok) {
      std::vector<char> success(static_cast<std::size_t>(trials), 0);
      if (bernoulli) {
        // fair coin per slot-2 link per trial; delays of surviving links stay
        // at the values the scheduler assumed so only link existence varies
        const int n = blind_graph.uav_count();
        parallel_for(static_cast<std::size_t>(trials), [&](std::size_t trial) {
          Rng rng(Rng::derive(sc.seed, 0x7121A1, pi, trial));
          std::vector<std::uint8_t> dead(static_cast<std::size_t>(n * n), 0);
          for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
              if (rng.uniform01() < 0.5) {
                dead[static_cast<std::size_t>(i * n + j)] = 1;
                dead[static_cast<std::size_t>(j * n + i)] = 1;
              }
            }
          }
          const ExecutionOutcome o = replay_schedule(
              blind_sched.evaluation, dag, blind_graph, fleet.capacities, &dead);
          success[trial] = o.success ? 1 : 0;
        });
      } else {
        const ExecutionOutcome o =
            replay_schedule(blind_sched.evaluation, dag, truth, fleet.capacities);
        std::fill(success.begin(), success.end(), o.success ? 1 : 0);
      }
      for (char s : success) p.blind_successes += s;
    }
  }

  for (std::size_t pi = 0; pi < sweep.size(); ++pi) {
    const Point& p = points[pi];
    auto emit = [&](const std::string& strategy, bool ok, long long successes,
                    int links, double expected_pct) {
      auto row = row_prefix(sc);
      row.insert(row.end(),
                 {mbit(sweep[pi]), strategy, static_cast<long long>(trials),
                  ok ? successes : 0LL,
                  ok ? 100.0 * static_cast<double>(successes) / trials : 0.0,
                  static_cast<long long>(links), expected_pct,
                  std::string(ok ? "ok" : "infeasible")});
      t.add_row(std::move(row));
    };
    emit("with-sins", p.sins_ok, p.sins_successes, p.sins_links, 100.0);
    const double blind_expected =
        bernoulli ? 100.0 * std::pow(0.5, p.blind_links) : kUnreachable;
    emit("no-sins", p.blind_ok, p.blind_successes, p.blind_links,
         bernoulli ? blind_expected : 0.0);
  }
  return t;
}

ResultTable run_sins_error_report(const Scenario& sc) {
  // single-vehicle study on the first UAV of the fleet
  const BuiltFleet fleet = build_fleet(sc);
  const TruthTrajectory& truth = fleet.truths[0];
  const double duration =
      std::min(sc.experiment.report_duration_s, truth.duration());
  const double update_dt = 2.0 * sc.imu.sample_dt_s;
  const double span = std::floor(duration / update_dt) * update_dt;

  const ImuErrorModel err = sc.error_model(Rng::derive(sc.seed, 0x111, 0));
  const auto trace = simulate_imu(truth, err, sc.imu.sample_dt_s, span);
  const auto states = dead_reckon(truth.initial_nav_state(), trace, sc.earth);

  ResultTable t;
  t.kind = "sins-error";
  t.header = {"scenario", "scenario_hash", "seed", "t_s",
              "pitch_err_rad", "roll_err_rad", "yaw_err_rad",
              "ve_err_mps", "vn_err_mps", "vu_err_mps",
              "east_err_m", "north_err_m", "up_err_m", "pos_err_m"};

  for (const NavState& s : states) {
    const TruthTrajectory::State ref = truth.at(s.t);
    const EulerAngles est = s.attitude();
    const EulerAngles tru = euler_from_matrix(ref.c_b_n);
    auto wrap = [](double a) {
      while (a > M_PI) a -= 2.0 * M_PI;
      while (a < -M_PI) a += 2.0 * M_PI;
      return a;
    };
    const Eigen::Vector3d est_enu = fleet.frame.to_enu(s.pos);
    const Eigen::Vector3d tru_enu = fleet.frame.to_enu(ref.pos);
    const Eigen::Vector3d dpos = est_enu - tru_enu;
    auto row = row_prefix(sc);
    row.insert(row.end(),
               {s.t, wrap(est.pitch - tru.pitch), wrap(est.roll - tru.roll),
                wrap(est.yaw - tru.yaw), s.vel.x() - ref.vel.x(),
                s.vel.y() - ref.vel.y(), s.vel.z() - ref.vel.z(), dpos.x(),
                dpos.y(), dpos.z(), dpos.norm()});
    t.add_row(std::move(row));
  }
  return t;
}

ResultTable run_experiment(const Scenario& sc, const std::string& kind) {
  if (kind == "data-size") return run_latency_vs_datasize(sc);
  if (kind == "complexity") return run_latency_vs_complexity(sc);
  if (kind == "algorithms") return run_algorithm_comparison(sc);
  if (kind == "success-rate") return run_success_rate(sc);
  if (kind == "sins-error") return run_sins_error_report(sc);
  throw ConfigError("unknown experiment kind '" + kind +
                    "' (expected data-size, complexity, algorithms, "
                    "success-rate or sins-error)");
}

}  // namespace eunsim
