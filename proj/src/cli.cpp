#include "eunsim/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "eunsim/experiments.hpp"
#include "eunsim/parallel.hpp"
#include "eunsim/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace eunsim {

namespace {

struct CommonOpts {
  std::string scenario_path;
  std::string out_dir = "out";
  std::string format = "csv";
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
  bool serial = false;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_out = true) {
  cmd->add_option("--scenario", o.scenario_path, "scenario file (JSON)")
      ->required();
  if (needs_out) {
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--format", o.format, "result format")
        ->check(CLI::IsMember({"csv", "json"}));
  }
  cmd->add_option("--seed", o.seed_override, "override the scenario seed")
      ->each([&](const std::string&) { o.has_seed_override = true; });
  cmd->add_flag("--serial", o.serial, "run the serial reference path");
  cmd->add_option("--threads", o.threads, "worker thread count (0 = default)");
}

Scenario load(const CommonOpts& o) {
  Scenario sc = load_scenario(o.scenario_path);
  if (o.has_seed_override) sc.seed = o.seed_override;
  set_parallel(!o.serial);
#ifdef _OPENMP
  if (o.threads > 0) omp_set_num_threads(o.threads);
#endif
  return sc;
}

int cmd_validate(const CommonOpts& o) {
  const Scenario sc = load(o);
  const TaskDag dag = sc.load_task_dag();  // referenced file must resolve
  std::cout << "scenario '" << sc.name << "' ok: " << sc.uavs.size()
            << " UAVs, slot " << sc.slot_duration_s << " s, task '"
            << sc.task.dag << "' (" << dag.size() << " subtasks), solver "
            << sc.solver_kind << "\n";
  return 0;
}

int cmd_predict(const CommonOpts& o, bool export_imu) {
  const Scenario sc = load(o);
  const BuiltFleet fleet = build_fleet(sc);

  ResultTable t;
  t.kind = "prediction";
  t.header = {"scenario", "scenario_hash", "seed", "uav",
              "slot", "e_m", "n_m", "u_m", "err_vs_truth_m"};
  for (int k = 0; k < sc.n_slots; ++k) {
    for (std::size_t u = 0; u < sc.uavs.size(); ++u) {
      const Eigen::Vector3d& p = fleet.predicted[static_cast<std::size_t>(k)][u];
      const double err =
          (p - fleet.truth_positions[static_cast<std::size_t>(k)][u]).norm();
      t.add_row({sc.name, hash_hex(sc.content_hash),
                 static_cast<long long>(sc.seed), static_cast<long long>(u + 1),
                 static_cast<long long>(k + 1), p.x(), p.y(), p.z(), err});
    }
  }
  const auto path = write_table(t, o.out_dir, "prediction", o.format);
  write_table(topology_table(predicted_graph(sc, fleet)), o.out_dir,
              "topology", o.format);
  if (export_imu) {
    for (std::size_t u = 0; u < fleet.tracks.size(); ++u) {
      std::ofstream f(std::filesystem::path(o.out_dir) /
                      ("imu_uav" + std::to_string(u + 1) + ".csv"));
      f << imu_trace_to_csv(fleet.tracks[u].trace);
    }
  }
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_schedule(const CommonOpts& o, const std::string& solver_override) {
  const Scenario sc = load(o);
  const BuiltFleet fleet = build_fleet(sc);
  const WtegGraph graph = predicted_graph(sc, fleet);
  TaskDag dag = sc.load_task_dag();
  dag.propagate_data_sizes(sc.task.d_source_bits, sc.task.delta_cpb,
                           sc.task.delta_multiplier);
  const std::string kind = solver_override.empty() ? sc.solver_kind : solver_override;
  const SolverResult r = run_solver(sc, kind, dag, graph, fleet.capacities,
                                    Rng::derive(sc.seed, 0x5C4));

  nlohmann::ordered_json report;
  report["scenario"] = sc.name;
  report["scenario_hash"] = hash_hex(sc.content_hash);
  report["seed"] = sc.seed;
  report["solver"] = kind;
  report["total_latency_s"] = r.latency;
  report["evaluations"] = r.evaluations;
  nlohmann::ordered_json subtasks = nlohmann::ordered_json::array();
  for (int i = 0; i < dag.size(); ++i) {
    const SubtaskTiming& st = r.evaluation.per_subtask[static_cast<std::size_t>(i)];
    nlohmann::ordered_json row;
    row["subtask"] = dag.node(i).id;
    row["uav"] = st.placement.uav + 1;
    row["first_slot"] = st.placement.first_slot + 1;
    row["cross_slot"] = st.placement.cross_slot;
    row["t_comp_s"] = st.t_comp;
    row["t_accu_s"] = st.t_accu;
    row["t_total_s"] = st.t_total;
    subtasks.push_back(std::move(row));
  }
  report["subtasks"] = std::move(subtasks);
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const EvaluatedEdge& e : r.evaluation.edge_paths) {
    nlohmann::ordered_json row;
    row["from"] = dag.node(e.from).id;
    row["to"] = dag.node(e.to).id;
    row["depart_s"] = e.depart;
    row["arrive_s"] = e.arrive;
    std::string hops;
    for (const NodeRef& nref : e.nodes) {
      if (!hops.empty()) hops += " -> ";
      hops += "u" + std::to_string(nref.uav + 1) + "^" + std::to_string(nref.slot + 1);
    }
    row["path"] = hops;
    edges.push_back(std::move(row));
  }
  report["edges"] = std::move(edges);

  std::filesystem::create_directories(o.out_dir);
  const auto report_path = std::filesystem::path(o.out_dir) / "schedule.json";
  std::ofstream rf(report_path);
  rf << report.dump(2) << "\n";
  write_table(topology_table(graph), o.out_dir, "topology", o.format);

  std::cout << "solver: " << kind << "\n";
  for (int i = 0; i < dag.size(); ++i) {
    const SubtaskTiming& st = r.evaluation.per_subtask[static_cast<std::size_t>(i)];
    std::cout << "  subtask " << dag.node(i).id << " -> u"
              << st.placement.uav + 1 << " slot " << st.placement.first_slot + 1
              << (st.placement.cross_slot ? "+2" : "") << "  comp "
              << format_double(st.t_comp) << " s, done "
              << format_double(st.t_total) << " s\n";
  }
  std::cout << "total T(X) = " << format_double(r.latency) << " s\n";
  std::cout << "report: " << report_path.string() << "\n";
  return 0;
}

int cmd_experiment(const CommonOpts& o, const std::string& kind) {
  const Scenario sc = load(o);
  const auto start = std::chrono::steady_clock::now();
  const ResultTable t = run_experiment(sc, kind);
  const auto path = write_table(t, o.out_dir, t.kind, o.format);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  // wall time stays out of the result files so reruns are byte-identical
  std::cerr << "experiment " << kind << ": " << t.rows.size() << " rows in "
            << format_double(secs) << " s\n";
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"UAV collaborative-computing scheduling simulator"};
  app.require_subcommand(1);

  CommonOpts validate_o, predict_o, schedule_o, experiment_o;
  bool export_imu = false;
  std::string solver_override;
  std::string experiment_kind;

  CLI::App* validate = app.add_subcommand("validate", "lint a scenario file");
  add_common(validate, validate_o, false);

  CLI::App* predict =
      app.add_subcommand("predict", "dead-reckon the fleet and report slot positions");
  add_common(predict, predict_o);
  predict->add_flag("--export-imu", export_imu, "also write per-UAV IMU traces");

  CLI::App* schedule =
      app.add_subcommand("schedule", "solve one mapping and print the evaluation");
  add_common(schedule, schedule_o);
  schedule->add_option("--solver", solver_override,
                       "override the scenario solver")
      ->check(CLI::IsMember({"bpso", "wrr", "greedy-lb", "pick-kx"}));

  CLI::App* experiment =
      app.add_subcommand("experiment", "run an experiment and emit result rows");
  experiment
      ->add_option("kind", experiment_kind,
                   "data-size | complexity | algorithms | success-rate | sins-error")
      ->required();
  add_common(experiment, experiment_o);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (validate->parsed()) return cmd_validate(validate_o);
    if (predict->parsed()) return cmd_predict(predict_o, export_imu);
    if (schedule->parsed()) return cmd_schedule(schedule_o, solver_override);
    if (experiment->parsed()) return cmd_experiment(experiment_o, experiment_kind);
  } catch (const NoFeasibleSchedule& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace eunsim
