#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "eunsim/geodesy.hpp"

namespace eunsim {

// Attitude as pitch/roll/yaw. Yaw follows the compass convention: zero is
// north, positive turns toward east (clockwise seen from above). Pitch is
// constrained to [-pi/2, pi/2], roll and yaw to (-pi, pi].
struct EulerAngles {
  double pitch = 0.0;
  double roll = 0.0;
  double yaw = 0.0;
};

// Body-to-navigation direction cosine matrix for a right-front-up body in an
// east-north-up navigation frame.
Eigen::Matrix3d attitude_matrix(const EulerAngles& a);
EulerAngles euler_from_matrix(const Eigen::Matrix3d& c_b_n);

// Navigation state of one vehicle at one instant. Velocity is [V_E, V_N, V_U]
// in m/s; position is geodetic.
struct NavState {
  Eigen::Matrix3d c_b_n = Eigen::Matrix3d::Identity();
  Eigen::Vector3d vel = Eigen::Vector3d::Zero();
  Geodetic pos;
  double t = 0.0;

  EulerAngles attitude() const { return euler_from_matrix(c_b_n); }
};

// One inertial update interval with two equal sub-samples: angular increments
// (rad) and specific-force velocity increments (m/s) in the body frame.
struct ImuSample {
  double t0 = 0.0;
  double t1 = 0.0;
  Eigen::Vector3d dtheta1 = Eigen::Vector3d::Zero();
  Eigen::Vector3d dtheta2 = Eigen::Vector3d::Zero();
  Eigen::Vector3d dvel1 = Eigen::Vector3d::Zero();
  Eigen::Vector3d dvel2 = Eigen::Vector3d::Zero();
};

// Constant biases plus white noise, applied per sub-sample. Noise densities
// are per sqrt(Hz): an interval of length dt gets sigma * sqrt(dt) added to
// the increment on each axis.
struct ImuErrorModel {
  Eigen::Vector3d gyro_bias_rps = Eigen::Vector3d::Zero();
  Eigen::Vector3d accel_bias_mps2 = Eigen::Vector3d::Zero();
  double gyro_noise_rps_sqrthz = 0.0;
  double accel_noise_mps2_sqrthz = 0.0;
  std::uint64_t seed = 0;

  static ImuErrorModel none() { return {}; }
  // Shipped sensor grade; see default values in sins.cpp. Calibrated so that
  // dead-reckoned position error stays below 20 m over the first 100 s of the
  // reference trajectory and reaches roughly 7-11% of distance travelled at
  // 240 s.
  static ImuErrorModel default_grade(std::uint64_t seed = 0);

  bool is_zero() const {
    return gyro_bias_rps.isZero() && accel_bias_mps2.isZero() &&
           gyro_noise_rps_sqrthz == 0.0 && accel_noise_mps2_sqrthz == 0.0;
  }
};

// Two-sample compensated rotation vector: d1 + d2 + (2/3) d1 x d2. The cross
// term is the coning correction; it vanishes when the sub-samples are
// parallel.
Eigen::Vector3d compensated_rotation_vector(const Eigen::Vector3d& d1,
                                            const Eigen::Vector3d& d2);

// DCM of a rotation vector (Rodrigues), series fallback near zero.
Eigen::Matrix3d rotation_from_vector(const Eigen::Vector3d& v);

// One attitude update: chains the navigation-frame rotation over the interval
// with the body rotation built from the two-sample compensated rotation
// vector. Throws std::invalid_argument if prev.c_b_n is not orthonormal.
Eigen::Matrix3d propagate_attitude(const NavState& prev, const ImuSample& s,
                                   const EarthModel& earth);

// One velocity update: specific-force increment (with rotation and sculling
// compensation) resolved through c_b_n, plus gravity/Coriolis terms.
Eigen::Vector3d update_velocity(const NavState& prev, const ImuSample& s,
                                const Eigen::Matrix3d& c_b_n,
                                const EarthModel& earth);

// Trapezoidal geodetic position update with the velocity-to-geodetic-rate
// matrix evaluated at the interval midpoint. Throws std::domain_error when
// the latitude is close enough to a pole for the mapping to be singular.
Geodetic update_position(const Geodetic& prev, const Eigen::Vector3d& v_prev,
                         const Eigen::Vector3d& v_new, double dt,
                         const EarthModel& earth);

// Full mechanization loop. Returns the state after every update interval,
// with element 0 being init itself. The trace must be time-ordered and
// gap-free.
std::vector<NavState> dead_reckon(const NavState& init,
                                  std::span<const ImuSample> trace,
                                  const EarthModel& earth);

// ---------------------------------------------------------------------------
// Ground-truth trajectories and the IMU simulator
// ---------------------------------------------------------------------------

// Piecewise truth motion: level attitude, yaw tracking the horizontal
// velocity heading. Segments chain continuously; straight keeps the current
// velocity, turn rotates it at a constant compass rate (positive clockwise).
struct TrajectorySegment {
  enum class Kind { straight, turn };
  Kind kind = Kind::straight;
  double duration_s = 0.0;
  double yaw_rate_rps = 0.0;  // turn only
};

class TruthTrajectory {
 public:
  // heading: compass radians; speed: horizontal m/s; climb: V_U m/s.
  TruthTrajectory(const Geodetic& start, double heading_rad, double speed_mps,
                  double climb_mps, std::vector<TrajectorySegment> segments,
                  const EarthModel& earth);

  struct State {
    Eigen::Matrix3d c_b_n;
    Eigen::Vector3d vel;      // ENU m/s
    Geodetic pos;
    Eigen::Vector3d accel;    // ENU m/s^2 (nav-frame derivative of vel)
    double yaw_rate = 0.0;    // compass rad/s
  };

  State at(double t) const;
  double duration() const { return duration_; }
  const EarthModel& earth() const { return earth_; }
  // segment joins, for splitting integrals across rate discontinuities
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  NavState initial_nav_state() const;

  // true angular rate and specific force sensed by ideal body-mounted sensors
  Eigen::Vector3d angular_rate_body(double t) const;
  Eigen::Vector3d specific_force_body(double t) const;

 private:
  struct SegmentState {
    double t0;
    double yaw;
    Eigen::Vector3d vel;
    Geodetic pos;
    TrajectorySegment seg;
  };

  State segment_state(const SegmentState& s, double t) const;

  EarthModel earth_;
  double duration_ = 0.0;
  std::vector<double> breakpoints_;
  std::vector<SegmentState> segments_;
  // fine grid of (t, pos, vel) for O(1) position lookup
  double grid_dt_ = 0.02;
  std::vector<Geodetic> grid_pos_;
  std::vector<Eigen::Vector3d> grid_vel_;
  std::vector<double> grid_t_;
};

// Generates the inertial increments an ideal strapdown unit would record for
// the truth motion, then applies the error model. Increments are high-order
// quadratures of the exact body rates, so a zero error model dead-reckons
// back onto the truth to within the mechanization truncation error.
// duration must be a whole number of update intervals (2 * sample_dt).
std::vector<ImuSample> simulate_imu(const TruthTrajectory& truth,
                                    const ImuErrorModel& err, double sample_dt,
                                    double duration);

// ---------------------------------------------------------------------------
// Fleet-level slot prediction
// ---------------------------------------------------------------------------

struct UavTrack {
  NavState init;
  std::vector<ImuSample> trace;
};

// Dead-reckons every UAV (in parallel) and reports the predicted local-ENU
// position at the start of each time slot. positions[slot][uav].
std::vector<std::vector<Eigen::Vector3d>> predict_slot_positions(
    std::span<const UavTrack> fleet, double slot_duration, int n_slots,
    const EarthModel& earth, const EnuFrame& frame);

}  // namespace eunsim
