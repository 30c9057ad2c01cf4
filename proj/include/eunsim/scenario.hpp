#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eunsim/channel_wteg.hpp"
#include "eunsim/schedulers.hpp"
#include "eunsim/sins.hpp"
#include "eunsim/task_dag.hpp"

namespace eunsim {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct SegmentSpec {
  std::string type;  // "straight" | "turn"
  double duration_s = 0.0;
  double yaw_rate_dps = 0.0;
  // optional declarations; a mismatch with the running value is rejected as a
  // velocity discontinuity
  std::optional<double> speed_mps;
  std::optional<double> climb_mps;
};

struct UavSpec {
  Eigen::Vector3d start_enu = Eigen::Vector3d::Zero();
  double heading_deg = 0.0;
  double speed_mps = 0.0;
  double climb_mps = 0.0;
  std::vector<SegmentSpec> segments;
};

struct TaskSpec {
  std::string dag;  // "phi1", "phi2" or a path relative to the scenario file
  double d_source_bits = 1.0e6;
  double delta_cpb = 237.5;  // 1900/8 cycles per bit
  double delta_multiplier = 1.0;
  double xi = 0.8;
};

struct ImuSpec {
  double sample_dt_s = 0.1;
  bool zero_error = false;        // overrides everything below
  bool default_grade = true;      // shipped error model
  ImuErrorModel custom;           // used when default_grade is false
};

struct ExperimentSpec {
  std::string kind;  // data-size | complexity | algorithms | success-rate | sins-error
  std::vector<double> d_sweep_bits;
  std::vector<double> complexity_multipliers;
  int seeds = 20;    // solver repetitions for the algorithm comparison
  int trials = 200;  // task requests per sweep point
  std::string no_sins_model = "bernoulli";  // bernoulli | physical
  double report_duration_s = 240.0;         // sins-error report span
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  double slot_duration_s = 4.0;
  int n_slots = 2;

  ChannelParams channel;
  Geodetic origin;  // anchor of the local ENU frame
  std::vector<UavSpec> uavs;
  double capacity_min_hz = 500.0e6;
  double capacity_max_hz = 1200.0e6;

  ImuSpec imu;
  TaskSpec task;
  std::string solver_kind = "bpso";
  BpsoParams solver;
  CloudParams cloud;
  ExperimentSpec experiment;

  std::filesystem::path source_path;
  std::uint64_t content_hash = 0;

  EarthModel earth = EarthModel::wgs84();

  ImuErrorModel error_model(std::uint64_t uav_seed) const;
  TaskDag load_task_dag() const;  // not yet propagated
};

// Parses and validates the JSON scenario document. Every ConfigError carries
// the offending key. dB/dBm/MHz/Mb style inputs are converted to SI here.
Scenario load_scenario(const std::filesystem::path& file);
Scenario parse_scenario(const std::string& text,
                        const std::filesystem::path& origin);

// ---------------------------------------------------------------------------
// Realized fleet: trajectories, IMU traces, predictions
// ---------------------------------------------------------------------------

struct BuiltFleet {
  EnuFrame frame;
  std::vector<TruthTrajectory> truths;
  std::vector<UavTrack> tracks;
  FleetCompute capacities;
  // [slot][uav] local ENU metres
  std::vector<std::vector<Eigen::Vector3d>> predicted;
  std::vector<std::vector<Eigen::Vector3d>> truth_positions;
};

// Simulates every UAV's IMU with per-UAV derived seeds, dead-reckons the slot
// predictions and draws the computing capacities from the scenario seed.
BuiltFleet build_fleet(const Scenario& sc);

// Graph built from SINS-predicted positions for both slots.
WtegGraph predicted_graph(const Scenario& sc, const BuiltFleet& fleet);
// Graph that assumes the first-slot topology persists (the no-prediction
// scheduling view).
WtegGraph persistence_graph(const Scenario& sc, const BuiltFleet& fleet);
// Graph built from the true positions (what execution actually encounters).
WtegGraph realized_graph(const Scenario& sc, const BuiltFleet& fleet);

}  // namespace eunsim
