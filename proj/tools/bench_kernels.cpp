// Compares the OpenMP kernels against the serial reference path on the three
// data-parallel hot spots: swarm fitness evaluation (via a full BPSO solve),
// fleet dead reckoning, and Monte-Carlo trial replay. Also asserts that both
// paths produce identical results.

#include <chrono>
#include <cstdio>
#include <functional>

#include "eunsim/experiments.hpp"
#include "eunsim/parallel.hpp"
#include "eunsim/rng.hpp"

using namespace eunsim;

namespace {

// best of three, first run doubling as warmup
double time_of(const std::function<void()>& fn) {
  double best = 1.0e30;
  for (int rep = 0; rep < 3; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(
        best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                  .count());
  }
  return best;
}

Scenario bench_scenario() {
  // nine drifting UAVs on a 4 km disc
  std::string doc = R"({
    "name": "bench",
    "seed": 424242,
    "slot_duration_s": 4.0,
    "fleet": {
      "origin_geodetic_deg": [29.0, 106.0, 450.0],
      "uavs": [)";
  for (int u = 0; u < 9; ++u) {
    const double ang = 2.0 * M_PI * u / 9.0;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  R"(%s{"start_enu_m":[%.1f,%.1f,%.1f],"heading_deg":%.1f,"speed_mps":12,
                   "segments":[{"type":"straight","duration_s":20}]})",
                  u ? "," : "", 2000.0 * std::cos(ang), 2000.0 * std::sin(ang),
                  450.0 + 10.0 * u, 40.0 * u);
    doc += buf;
  }
  doc += R"(]},
    "task": {"dag": "phi1", "d_source_mbit": 3.0},
    "solver": {"kind": "bpso", "swarm": 160, "iters": 100}
  })";
  return parse_scenario(doc, "bench.json");
}

}  // namespace

int main() {
  const Scenario sc = bench_scenario();

  std::printf("%-28s %10s %10s %8s\n", "kernel", "serial_s", "openmp_s",
              "speedup");

  // fleet IMU simulation + dead reckoning over long traces
  {
    const EarthModel earth = EarthModel::wgs84();
    const Geodetic start{29.0 * M_PI / 180.0, 106.0 * M_PI / 180.0, 450.0};
    const EnuFrame frame(start, earth);
    std::vector<TruthTrajectory> truths;
    for (int u = 0; u < 9; ++u) {
      truths.emplace_back(
          start, 0.7 * u, 8.0 + u, 0.0,
          std::vector<TrajectorySegment>{
              {TrajectorySegment::Kind::straight, 100.0, 0.0},
              {TrajectorySegment::Kind::turn, 140.0, 0.02}},
          earth);
    }
    auto run = [&] {
      std::vector<UavTrack> fleet(truths.size());
      parallel_for(truths.size(), [&](std::size_t u) {
        fleet[u].init = truths[u].initial_nav_state();
        fleet[u].trace = simulate_imu(truths[u], ImuErrorModel::default_grade(u),
                                      0.02, 240.0);
      });
      return predict_slot_positions(fleet, 4.0, 2, earth, frame);
    };
    set_parallel(false);
    std::vector<std::vector<Eigen::Vector3d>> serial_pos;
    const double ts = time_of([&] { serial_pos = run(); });
    set_parallel(true);
    std::vector<std::vector<Eigen::Vector3d>> par_pos;
    const double tp = time_of([&] { par_pos = run(); });
    const bool same = serial_pos == par_pos;
    std::printf("%-28s %10.3f %10.3f %7.2fx %s\n", "fleet dead reckoning", ts,
                tp, ts / tp, same ? "" : "MISMATCH");
  }

  // swarm search
  const BuiltFleet fleet = build_fleet(sc);
  const WtegGraph graph = predicted_graph(sc, fleet);
  TaskDag dag = sc.load_task_dag();
  dag.propagate_data_sizes(sc.task.d_source_bits, sc.task.delta_cpb, 1.0);
  {
    SolverResult rs, rp;
    set_parallel(false);
    const double ts = time_of([&] {
      rs = run_solver(sc, "bpso", dag, graph, fleet.capacities, 7);
    });
    set_parallel(true);
    const double tp = time_of([&] {
      rp = run_solver(sc, "bpso", dag, graph, fleet.capacities, 7);
    });
    const bool same = rs.latency == rp.latency && rs.best == rp.best &&
                      rs.best_trace == rp.best_trace;
    std::printf("%-28s %10.3f %10.3f %7.2fx %s\n", "bpso swarm search", ts, tp,
                ts / tp, same ? "" : "MISMATCH");
  }

  // Monte-Carlo trial replay
  {
    Scenario mc = sc;
    mc.experiment.trials = 6000;
    mc.experiment.d_sweep_bits = {4.0e6};
    mc.experiment.no_sins_model = "bernoulli";
    ResultTable rs, rp;
    set_parallel(false);
    const double ts = time_of([&] { rs = run_success_rate(mc); });
    set_parallel(true);
    const double tp = time_of([&] { rp = run_success_rate(mc); });
    const bool same = to_csv(rs) == to_csv(rp);
    std::printf("%-28s %10.3f %10.3f %7.2fx %s\n", "success-rate trials", ts,
                tp, ts / tp, same ? "" : "MISMATCH");
  }

  std::printf("workers available: %d\n", worker_count());
  return 0;
}
