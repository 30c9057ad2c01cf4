#include "eunsim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "eunsim/io.hpp"
#include "eunsim/parallel.hpp"
#include "eunsim/rng.hpp"

namespace eunsim {

namespace {

using nlohmann::json;

constexpr double kDegToRad = M_PI / 180.0;

double require_number(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ConfigError("missing or non-numeric field '" + key + "'");
  }
  return j[key].get<double>();
}

double number_or(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) {
    throw ConfigError("field '" + key + "' must be a number");
  }
  return j[key].get<double>();
}

void check_positive(double v, const std::string& key) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError("field '" + key + "' must be positive and finite");
  }
}

ChannelParams parse_channel(const json& j) {
  ChannelParams p;
  p.transmit_power_w = number_or(j, "p_t_w", p.transmit_power_w);
  p.gain_tx = ChannelParams::db_to_linear(number_or(j, "g_t_db", 3.0));
  p.gain_rx = ChannelParams::db_to_linear(number_or(j, "g_r_db", 3.0));
  p.carrier_hz = number_or(j, "f_hz", p.carrier_hz);
  p.bandwidth_hz = number_or(j, "b_hz", p.bandwidth_hz);
  p.noise_power_w = ChannelParams::dbm_to_watt(number_or(j, "sigma2_dbm", -100.0));
  p.xi_los = ChannelParams::db_to_linear(number_or(j, "xi_los_db", 0.0));
  p.max_range_m = number_or(j, "d_max_m", p.max_range_m);
  check_positive(p.transmit_power_w, "p_t_w");
  check_positive(p.carrier_hz, "f_hz");
  check_positive(p.bandwidth_hz, "b_hz");
  check_positive(p.noise_power_w, "sigma2_dbm (converted)");
  check_positive(p.max_range_m, "d_max_m");
  if (p.xi_los < 1.0) {
    throw ConfigError("xi_los_db must be >= 0 dB (attenuation factor >= 1)");
  }
  return p;
}

std::vector<SegmentSpec> parse_segments(const json& j) {
  std::vector<SegmentSpec> out;
  if (!j.is_array() || j.empty()) {
    throw ConfigError("uav 'segments' must be a non-empty array");
  }
  for (const json& s : j) {
    SegmentSpec seg;
    seg.type = s.value("type", std::string{});
    if (seg.type != "straight" && seg.type != "turn") {
      throw ConfigError("segment type must be 'straight' or 'turn'");
    }
    seg.duration_s = require_number(s, "duration_s");
    check_positive(seg.duration_s, "segment duration_s");
    if (seg.type == "turn") {
      seg.yaw_rate_dps = require_number(s, "yaw_rate_dps");
    }
    if (s.contains("speed_mps")) seg.speed_mps = require_number(s, "speed_mps");
    if (s.contains("climb_mps")) seg.climb_mps = require_number(s, "climb_mps");
    out.push_back(seg);
  }
  return out;
}

double mbit_to_bits(double mbit) { return mbit * 1.0e6; }

std::vector<double> parse_sweep_mbit(const json& j, const std::string& key) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  for (const json& v : j[key]) {
    out.push_back(mbit_to_bits(v.get<double>()));
  }
  return out;
}

}  // namespace

Scenario parse_scenario(const std::string& text,
                        const std::filesystem::path& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin.string() + ": " + e.what());
  }

  Scenario sc;
  sc.source_path = origin;
  try {
  sc.name = j.value("name", origin.stem().string());
  if (!j.contains("seed")) {
    throw ConfigError("scenario must declare an explicit 'seed'");
  }
  sc.seed = j["seed"].get<std::uint64_t>();
  sc.slot_duration_s = number_or(j, "slot_duration_s", 4.0);
  check_positive(sc.slot_duration_s, "slot_duration_s");

  if (j.contains("channel")) sc.channel = parse_channel(j["channel"]);

  const json& fleet = j.at("fleet");
  const json& origin_deg = fleet.at("origin_geodetic_deg");
  sc.origin = {origin_deg.at(0).get<double>() * kDegToRad,
               origin_deg.at(1).get<double>() * kDegToRad,
               origin_deg.at(2).get<double>()};
  sc.capacity_min_hz = number_or(fleet, "capacity_min_mhz", 500.0) * 1.0e6;
  sc.capacity_max_hz = number_or(fleet, "capacity_max_mhz", 1200.0) * 1.0e6;
  if (sc.capacity_min_hz > sc.capacity_max_hz) {
    throw ConfigError("capacity range is inverted");
  }
  for (const json& u : fleet.at("uavs")) {
    UavSpec spec;
    const json& s = u.at("start_enu_m");
    spec.start_enu = {s.at(0).get<double>(), s.at(1).get<double>(),
                      s.at(2).get<double>()};
    spec.heading_deg = number_or(u, "heading_deg", 0.0);
    spec.speed_mps = number_or(u, "speed_mps", 0.0);
    spec.climb_mps = number_or(u, "climb_mps", 0.0);
    spec.segments = parse_segments(u.at("segments"));
    sc.uavs.push_back(std::move(spec));
  }
  if (sc.uavs.size() < 2) {
    throw ConfigError("fleet needs at least two UAVs");
  }

  if (j.contains("imu")) {
    const json& imu = j["imu"];
    sc.imu.sample_dt_s = number_or(imu, "sample_dt_s", 0.1);
    check_positive(sc.imu.sample_dt_s, "sample_dt_s");
    const std::string grade = imu.value("errors", std::string("default"));
    if (grade == "none") {
      sc.imu.zero_error = true;
      sc.imu.default_grade = false;
    } else if (grade == "default") {
      sc.imu.default_grade = true;
    } else if (grade == "custom") {
      sc.imu.default_grade = false;
      ImuErrorModel m;
      const double dph = M_PI / 180.0 / 3600.0;
      if (imu.contains("gyro_bias_dph")) {
        const json& b = imu["gyro_bias_dph"];
        m.gyro_bias_rps = Eigen::Vector3d(b.at(0).get<double>(), b.at(1).get<double>(),
                                          b.at(2).get<double>()) * dph;
      }
      if (imu.contains("accel_bias_ug")) {
        const json& b = imu["accel_bias_ug"];
        m.accel_bias_mps2 = Eigen::Vector3d(b.at(0).get<double>(),
                                            b.at(1).get<double>(),
                                            b.at(2).get<double>()) * 9.80665e-6;
      }
      m.gyro_noise_rps_sqrthz = number_or(imu, "gyro_arw_dpsh", 0.0) * dph * 60.0;
      m.accel_noise_mps2_sqrthz = number_or(imu, "accel_vrw_mps2_sqrthz", 0.0);
      if (m.gyro_noise_rps_sqrthz < 0.0 || m.accel_noise_mps2_sqrthz < 0.0) {
        throw ConfigError("noise densities must be >= 0");
      }
      sc.imu.custom = m;
    } else {
      throw ConfigError("imu.errors must be 'none', 'default' or 'custom'");
    }
  }

  if (j.contains("task")) {
    const json& t = j["task"];
    sc.task.dag = t.value("dag", std::string("phi1"));
    sc.task.d_source_bits = mbit_to_bits(number_or(t, "d_source_mbit", 1.0));
    sc.task.delta_cpb = number_or(t, "delta_cycles_per_bit", 1900.0 / 8.0);
    check_positive(sc.task.delta_cpb, "delta_cycles_per_bit");
    sc.task.delta_multiplier = number_or(t, "delta_multiplier", 1.0);
    check_positive(sc.task.delta_multiplier, "delta_multiplier");
    sc.task.xi = number_or(t, "xi", 0.8);
    if (sc.task.xi <= 0.0 || sc.task.xi > 1.0) {
      throw ConfigError("task xi must lie in (0, 1]");
    }
  }

  if (j.contains("solver")) {
    const json& s = j["solver"];
    sc.solver_kind = s.value("kind", std::string("bpso"));
    const std::set<std::string> kinds{"bpso", "wrr", "greedy-lb", "pick-kx"};
    if (!kinds.count(sc.solver_kind)) {
      throw ConfigError("unknown solver kind '" + sc.solver_kind + "'");
    }
    sc.solver.swarm = static_cast<int>(number_or(s, "swarm", 100));
    sc.solver.iters = static_cast<int>(number_or(s, "iters", 100));
    sc.solver.inertia = number_or(s, "inertia", 1.5);
    sc.solver.alpha1 = number_or(s, "alpha1", 1.0);
    sc.solver.alpha2 = number_or(s, "alpha2", 1.0);
    sc.solver.v_max = number_or(s, "v_max", 6.0);
    if (sc.solver.swarm < 1 || sc.solver.iters < 0 || sc.solver.inertia <= 0.0) {
      throw ConfigError("solver parameters out of range");
    }
  }

  if (j.contains("cloud")) {
    const json& c = j["cloud"];
    sc.cloud.capacity_hz = number_or(c, "capacity_ghz", 10.0) * 1.0e9;
    sc.cloud.backhaul_bps = number_or(c, "backhaul_mbps", 1.0) * 1.0e6;
    check_positive(sc.cloud.capacity_hz, "cloud capacity_ghz");
    check_positive(sc.cloud.backhaul_bps, "cloud backhaul_mbps");
  }

  if (j.contains("experiment")) {
    const json& e = j["experiment"];
    sc.experiment.kind = e.value("kind", std::string{});
    sc.experiment.d_sweep_bits = parse_sweep_mbit(e, "d_sweep_mbit");
    if (e.contains("complexity_multipliers")) {
      for (const json& v : e["complexity_multipliers"]) {
        sc.experiment.complexity_multipliers.push_back(v.get<double>());
      }
    }
    sc.experiment.seeds = static_cast<int>(number_or(e, "seeds", 20));
    sc.experiment.trials = static_cast<int>(number_or(e, "trials", 200));
    sc.experiment.no_sins_model = e.value("no_sins_model", std::string("bernoulli"));
    if (sc.experiment.no_sins_model != "bernoulli" &&
        sc.experiment.no_sins_model != "physical") {
      throw ConfigError("no_sins_model must be 'bernoulli' or 'physical'");
    }
    sc.experiment.report_duration_s = number_or(e, "report_duration_s", 240.0);
    if (sc.experiment.seeds < 1 || sc.experiment.trials < 1) {
      throw ConfigError("experiment seeds/trials must be >= 1");
    }
  }

  // every trajectory must cover the scheduling horizon
  const double horizon = 2.0 * sc.slot_duration_s;
  for (std::size_t u = 0; u < sc.uavs.size(); ++u) {
    double total = 0.0;
    for (const SegmentSpec& s : sc.uavs[u].segments) total += s.duration_s;
    if (total + 1.0e-9 < horizon) {
      throw ConfigError("uav " + std::to_string(u) +
                        " trajectory shorter than the two-slot horizon");
    }
  }
  } catch (const json::exception& e) {
    throw ConfigError(origin.string() + ": " + e.what());
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw ConfigError("cannot open scenario file: " + file.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  Scenario sc = parse_scenario(buf.str(), file);
  sc.content_hash = hash_file(file);
  return sc;
}

ImuErrorModel Scenario::error_model(std::uint64_t uav_seed) const {
  if (imu.zero_error) return ImuErrorModel::none();
  ImuErrorModel m = imu.default_grade ? ImuErrorModel::default_grade() : imu.custom;
  m.seed = uav_seed;
  return m;
}

TaskDag Scenario::load_task_dag() const {
  if (task.dag == "phi1") return builtin_dag_phi1(task.xi);
  if (task.dag == "phi2") return builtin_dag_phi2(task.xi);
  std::filesystem::path p = task.dag;
  if (p.is_relative() && !source_path.empty()) {
    p = source_path.parent_path() / p;
  }
  return load_dag(p);
}

// ---------------------------------------------------------------------------
// fleet realization
// ---------------------------------------------------------------------------

BuiltFleet build_fleet(const Scenario& sc) {
  BuiltFleet f;
  f.frame = EnuFrame(sc.origin, sc.earth);

  const double horizon = sc.n_slots * sc.slot_duration_s;
  const double update_dt = 2.0 * sc.imu.sample_dt_s;
  const double sim_duration =
      std::ceil(horizon / update_dt - 1.0e-9) * update_dt;

  Rng cap_rng(Rng::derive(sc.seed, 0xCA9));
  for (std::size_t u = 0; u < sc.uavs.size(); ++u) {
    const UavSpec& spec = sc.uavs[u];
    const Geodetic start = f.frame.to_geodetic(spec.start_enu);

    double speed = spec.speed_mps;
    double climb = spec.climb_mps;
    std::vector<TrajectorySegment> segs;
    for (const SegmentSpec& s : spec.segments) {
      if (s.speed_mps && std::abs(*s.speed_mps - speed) > 1.0e-9) {
        throw ConfigError("uav " + std::to_string(u) +
                          ": declared segment speed introduces a velocity "
                          "discontinuity");
      }
      if (s.climb_mps && std::abs(*s.climb_mps - climb) > 1.0e-9) {
        throw ConfigError("uav " + std::to_string(u) +
                          ": declared segment climb introduces a velocity "
                          "discontinuity");
      }
      TrajectorySegment seg;
      seg.kind = s.type == "turn" ? TrajectorySegment::Kind::turn
                                  : TrajectorySegment::Kind::straight;
      seg.duration_s = s.duration_s;
      seg.yaw_rate_rps = s.yaw_rate_dps * kDegToRad;
      segs.push_back(seg);
    }
    f.truths.emplace_back(start, spec.heading_deg * kDegToRad, spec.speed_mps,
                          spec.climb_mps, std::move(segs), sc.earth);

    f.capacities.capacity_hz.push_back(
        cap_rng.uniform(sc.capacity_min_hz, sc.capacity_max_hz));
  }

  // IMU simulation per UAV (independent seeded streams, parallel kernel)
  f.tracks.resize(sc.uavs.size());
  std::vector<std::string> errors(sc.uavs.size());
  parallel_for(sc.uavs.size(), [&](std::size_t u) {
    try {
      const ImuErrorModel err = sc.error_model(Rng::derive(sc.seed, 0x111, u));
      f.tracks[u].init = f.truths[u].initial_nav_state();
      f.tracks[u].trace =
          simulate_imu(f.truths[u], err, sc.imu.sample_dt_s, sim_duration);
    } catch (const std::exception& e) {
      errors[u] = e.what();
    }
  });
  for (std::size_t u = 0; u < errors.size(); ++u) {
    if (!errors[u].empty()) {
      throw ConfigError("uav " + std::to_string(u) + ": " + errors[u]);
    }
  }

  f.predicted = predict_slot_positions(f.tracks, sc.slot_duration_s, sc.n_slots,
                                       sc.earth, f.frame);
  f.truth_positions.resize(static_cast<std::size_t>(sc.n_slots));
  for (int k = 0; k < sc.n_slots; ++k) {
    auto& slot = f.truth_positions[static_cast<std::size_t>(k)];
    slot.resize(sc.uavs.size());
    for (std::size_t u = 0; u < sc.uavs.size(); ++u) {
      slot[u] = f.frame.to_enu(f.truths[u].at(k * sc.slot_duration_s).pos);
    }
  }
  return f;
}

namespace {

WtegGraph graph_from(const std::vector<Eigen::Vector3d>& slot0,
                     const std::vector<Eigen::Vector3d>& slot1,
                     const Scenario& sc) {
  const SlotTopology t0 = build_slot_topology(slot0, sc.channel, 0);
  const SlotTopology t1 = build_slot_topology(slot1, sc.channel, 1);
  const std::vector<double> consumed(slot0.size(), 0.0);
  return WtegGraph::assemble(t0, t1, consumed, sc.slot_duration_s);
}

}  // namespace

WtegGraph predicted_graph(const Scenario& sc, const BuiltFleet& fleet) {
  return graph_from(fleet.predicted[0], fleet.predicted[1], sc);
}

WtegGraph persistence_graph(const Scenario& sc, const BuiltFleet& fleet) {
  return graph_from(fleet.predicted[0], fleet.predicted[0], sc);
}

WtegGraph realized_graph(const Scenario& sc, const BuiltFleet& fleet) {
  return graph_from(fleet.truth_positions[0], fleet.truth_positions[1], sc);
}

}  // namespace eunsim
