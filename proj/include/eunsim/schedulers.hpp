#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eunsim/mapping_latency.hpp"

namespace eunsim {

struct BpsoParams {
  int swarm = 100;
  int iters = 100;
  double inertia = 1.5;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double v_max = 6.0;  // sigmoid saturation guard
  std::uint64_t seed = 0;
};

// Everything a solver needs to score candidate schedules.
struct SchedulingInstance {
  const TaskDag* dag = nullptr;
  const WtegGraph* wteg = nullptr;
  const FleetCompute* fleet = nullptr;
};

struct SolverResult {
  bool feasible = false;
  DecisionMatrix best;
  double latency = kUnreachable;
  ScheduleEvaluation evaluation;
  std::vector<double> best_trace;  // best fitness after each iteration
  long evaluations = 0;
};

class NoFeasibleSchedule : public std::runtime_error {
 public:
  explicit NoFeasibleSchedule(const std::string& what)
      : std::runtime_error(what) {}
};

// Binary particle swarm over the decision-matrix bit vector. Velocities
// update with inertia plus the two stochastic attraction terms, positions are
// re-sampled through the sigmoid, and every particle is repaired to a
// rule-satisfying matrix after each move (anchors forced, one base bit per
// row, next-slot replica added when the finish-time check demands it).
// Fitness evaluations within an iteration run through the parallel kernel;
// per-particle RNG substreams keep the result independent of thread count.
SolverResult bpso_solve(const SchedulingInstance& inst, const BpsoParams& params);

// Weighted round robin over intermediate subtasks in topological order,
// weights proportional to UAV computing capacity. Deterministic.
SolverResult wrr_solve(const SchedulingInstance& inst);

// Least accumulated compute seconds first, ties by UAV id. Deterministic.
SolverResult greedy_lb_solve(const SchedulingInstance& inst);

// Uniform random placement of intermediate subtasks, seeded.
SolverResult pick_kx_solve(const SchedulingInstance& inst, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Architecture baselines (no expanded graph involved)
// ---------------------------------------------------------------------------

struct CloudParams {
  double capacity_hz = 10.0e9;
  double backhaul_bps = 1.0e6;  // shared by uplink and downlink
};

// Update primitives, exposed for the unit tests.
namespace bpso_detail {
// 1 / (1 + e^-v)
double sigmoid(double v);
// inertia * v + a1*b1*(p - x) + a2*b2*(g - x), clamped to [-v_max, v_max]
double velocity_update(double v, double x, double p_best, double g_best,
                       const BpsoParams& params, double beta1, double beta2);
}  // namespace bpso_detail

struct ArchitectureLatency {
  double total = 0.0;
  double uplink = 0.0;
  double compute = 0.0;
  double downlink = 0.0;
};

// All subtasks sequentially on the task initiator: no transmission at all.
ArchitectureLatency local_latency(const TaskDag& dag, double initiator_capacity_hz);

// Source payload uplinked once, all subtasks sequentially on the cloud node,
// terminal output downlinked.
ArchitectureLatency cloud_latency(const TaskDag& dag, const CloudParams& cloud);

}  // namespace eunsim
