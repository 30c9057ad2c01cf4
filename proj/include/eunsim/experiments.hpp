#pragma once

#include "eunsim/io.hpp"
#include "eunsim/scenario.hpp"

namespace eunsim {

// Outcome of executing one committed schedule against a realized topology.
struct ExecutionOutcome {
  bool success = false;
  int failed_edge_from = -1;  // dag node indices, -1 when nothing failed
  int failed_edge_to = -1;
  double finish = kUnreachable;
};

// Re-times a committed schedule on a (possibly different) realized graph
// without re-routing: every committed transmission path must exist link by
// link and fit its slot windows, and the sink must finish inside the horizon.
// dead_slot2_links, when given, marks additional slot-2 UAV pairs as down
// (row-major n*n, nonzero = dead); the coin-flip link model uses it to avoid
// rebuilding a graph per trial.
ExecutionOutcome replay_schedule(const ScheduleEvaluation& committed,
                                 const TaskDag& dag, const WtegGraph& realized,
                                 const FleetCompute& fleet,
                                 const std::vector<std::uint8_t>* dead_slot2_links = nullptr);

// Distinct slot-2 links (unordered UAV pairs) the committed transmission
// paths rely on. Under the fair-coin link model the schedule survives with
// probability 0.5^count.
int count_slot2_links(const ScheduleEvaluation& committed);

// Runs the scenario's solver on a given graph. Seed applies to the seeded
// solvers and is ignored by the deterministic ones.
SolverResult run_solver(const Scenario& sc, const std::string& kind,
                        const TaskDag& dag, const WtegGraph& graph,
                        const FleetCompute& fleet, std::uint64_t seed);

// Experiment runners. Each returns a tidy table, rows sorted by key, every
// row carrying the scenario hash and the master seed that regenerate it.
// seed_override, when nonzero, replaces the scenario's master seed.
ResultTable run_latency_vs_datasize(const Scenario& sc);
ResultTable run_latency_vs_complexity(const Scenario& sc);
ResultTable run_algorithm_comparison(const Scenario& sc);
ResultTable run_success_rate(const Scenario& sc);
ResultTable run_sins_error_report(const Scenario& sc);

// Dispatch by kind name used by the CLI: data-size, complexity, algorithms,
// success-rate, sins-error.
ResultTable run_experiment(const Scenario& sc, const std::string& kind);

}  // namespace eunsim
