#include "eunsim/sins.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "eunsim/parallel.hpp"
#include "eunsim/rng.hpp"

namespace eunsim {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

// symmetric first-order re-orthonormalization; drift per step is ~1e-16 so
// one pass keeps ||C C^T - I|| at machine level indefinitely
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& c) {
  return 0.5 * c * (3.0 * Eigen::Matrix3d::Identity() - c.transpose() * c);
}

bool is_orthonormal(const Eigen::Matrix3d& c, double tol) {
  return (c * c.transpose() - Eigen::Matrix3d::Identity())
             .cwiseAbs()
             .maxCoeff() < tol &&
         c.determinant() > 0.0;
}

Eigen::Vector3d gravity_enu(const Geodetic& p, const EarthModel& earth) {
  return {0.0, 0.0, -earth.gravity(p.lat, p.h)};
}

// geodetic rates for ENU velocity: [Ldot, londot, hdot]
Eigen::Vector3d geodetic_rates(const Geodetic& p, const Eigen::Vector3d& v,
                               const EarthModel& earth) {
  const double rm = earth.meridian_radius(p.lat) + p.h;
  const double rn = earth.transverse_radius(p.lat) + p.h;
  return {v.y() / rm, v.x() / (rn * std::cos(p.lat)), v.z()};
}

constexpr double kPoleGuardRad = 1.75e-4;  // ~0.01 deg short of +-90

void check_not_polar(double lat) {
  if (std::abs(lat) > M_PI / 2.0 - kPoleGuardRad) {
    throw std::domain_error(
        "position update undefined this close to a geographic pole");
  }
}

}  // namespace

Eigen::Matrix3d attitude_matrix(const EulerAngles& a) {
  const double st = std::sin(a.pitch), ct = std::cos(a.pitch);
  const double sg = std::sin(a.roll), cg = std::cos(a.roll);
  const double sy = std::sin(a.yaw), cy = std::cos(a.yaw);
  Eigen::Matrix3d c;
  c << cg * cy + sg * sy * st, sy * ct, sg * cy - cg * sy * st,
      -cg * sy + sg * cy * st, cy * ct, -sg * sy - cg * cy * st,
      -sg * ct, st, cg * ct;
  return c;
}

EulerAngles euler_from_matrix(const Eigen::Matrix3d& c) {
  EulerAngles a;
  a.pitch = std::asin(std::clamp(c(2, 1), -1.0, 1.0));
  a.roll = std::atan2(-c(2, 0), c(2, 2));
  a.yaw = std::atan2(c(0, 1), c(1, 1));
  return a;
}

Eigen::Vector3d compensated_rotation_vector(const Eigen::Vector3d& d1,
                                            const Eigen::Vector3d& d2) {
  return d1 + d2 + (2.0 / 3.0) * d1.cross(d2);
}

Eigen::Matrix3d rotation_from_vector(const Eigen::Vector3d& v) {
  const double n2 = v.squaredNorm();
  const Eigen::Matrix3d vx = skew(v);
  if (n2 < 1.0e-20) {
    return Eigen::Matrix3d::Identity() + vx + 0.5 * vx * vx;
  }
  const double n = std::sqrt(n2);
  return Eigen::Matrix3d::Identity() + (std::sin(n) / n) * vx +
         ((1.0 - std::cos(n)) / n2) * vx * vx;
}

Eigen::Matrix3d propagate_attitude(const NavState& prev, const ImuSample& s,
                                   const EarthModel& earth) {
  if (!is_orthonormal(prev.c_b_n, 1.0e-8)) {
    throw std::invalid_argument("attitude matrix is not orthonormal");
  }
  const double dt = s.t1 - s.t0;
  const Eigen::Vector3d phi_b = compensated_rotation_vector(s.dtheta1, s.dtheta2);
  const Eigen::Vector3d zeta =
      (earth.omega_ie_enu(prev.pos.lat) + earth.omega_en_enu(prev.pos, prev.vel)) *
      dt;
  const Eigen::Matrix3d c_new = rotation_from_vector(-zeta) * prev.c_b_n *
                                rotation_from_vector(phi_b);
  return orthonormalize(c_new);
}

Eigen::Vector3d update_velocity(const NavState& prev, const ImuSample& s,
                                const Eigen::Matrix3d& c_b_n,
                                const EarthModel& earth) {
  const double dt = s.t1 - s.t0;
  const Eigen::Vector3d dtheta = s.dtheta1 + s.dtheta2;
  const Eigen::Vector3d dv = s.dvel1 + s.dvel2;
  // rotation + sculling compensation (two-sample form)
  const Eigen::Vector3d dv_sf_b =
      dv + 0.5 * dtheta.cross(dv) +
      (2.0 / 3.0) * (s.dtheta1.cross(s.dvel2) + s.dvel1.cross(s.dtheta2));
  const Eigen::Vector3d omega_ie = earth.omega_ie_enu(prev.pos.lat);
  const Eigen::Vector3d omega_en = earth.omega_en_enu(prev.pos, prev.vel);
  const Eigen::Vector3d zeta = (omega_ie + omega_en) * dt;
  const Eigen::Vector3d dv_sf_n =
      (Eigen::Matrix3d::Identity() - 0.5 * skew(zeta)) * c_b_n * dv_sf_b;
  const Eigen::Vector3d dv_cor =
      (gravity_enu(prev.pos, earth) - (2.0 * omega_ie + omega_en).cross(prev.vel)) *
      dt;
  return prev.vel + dv_sf_n + dv_cor;
}

Geodetic update_position(const Geodetic& prev, const Eigen::Vector3d& v_prev,
                         const Eigen::Vector3d& v_new, double dt,
                         const EarthModel& earth) {
  if (dt <= 0.0) {
    throw std::invalid_argument("position update needs dt > 0");
  }
  check_not_polar(prev.lat);
  const Eigen::Vector3d v_mid = 0.5 * (v_prev + v_new);
  // provisional half step to evaluate the rate mapping at the midpoint
  const Eigen::Vector3d r0 = geodetic_rates(prev, v_mid, earth);
  Geodetic half{prev.lat + r0.x() * dt * 0.5, prev.lon + r0.y() * dt * 0.5,
                prev.h + r0.z() * dt * 0.5};
  check_not_polar(half.lat);
  const Eigen::Vector3d r = geodetic_rates(half, v_mid, earth);
  return {prev.lat + r.x() * dt, prev.lon + r.y() * dt, prev.h + r.z() * dt};
}

std::vector<NavState> dead_reckon(const NavState& init,
                                  std::span<const ImuSample> trace,
                                  const EarthModel& earth) {
  std::vector<NavState> out;
  out.reserve(trace.size() + 1);
  out.push_back(init);
  NavState st = init;
  double prev_t1 = init.t;
  for (const ImuSample& s : trace) {
    if (s.t1 <= s.t0 || std::abs(s.t0 - prev_t1) > 1.0e-9) {
      throw std::invalid_argument("IMU trace is not time-ordered and gap-free");
    }
    prev_t1 = s.t1;
    const Eigen::Matrix3d c_new = propagate_attitude(st, s, earth);
    const Eigen::Vector3d v_new = update_velocity(st, s, st.c_b_n, earth);
    st.pos = update_position(st.pos, st.vel, v_new, s.t1 - s.t0, earth);
    st.c_b_n = c_new;
    st.vel = v_new;
    st.t = s.t1;
    out.push_back(st);
  }
  return out;
}

// ---------------------------------------------------------------------------
// TruthTrajectory
// ---------------------------------------------------------------------------

namespace {

// velocity / yaw / acceleration closed forms within one segment
struct SegmentKinematics {
  Eigen::Vector3d vel;
  Eigen::Vector3d accel;
  double yaw;
  double yaw_rate;
};

SegmentKinematics kinematics_at(const TrajectorySegment& seg, double yaw0,
                                const Eigen::Vector3d& vel0, double tau) {
  SegmentKinematics k;
  if (seg.kind == TrajectorySegment::Kind::straight) {
    k.vel = vel0;
    k.accel = Eigen::Vector3d::Zero();
    k.yaw = yaw0;
    k.yaw_rate = 0.0;
    return k;
  }
  const double sh = std::hypot(vel0.x(), vel0.y());
  const double yaw = yaw0 + seg.yaw_rate_rps * tau;
  k.vel = {sh * std::sin(yaw), sh * std::cos(yaw), vel0.z()};
  k.accel = {seg.yaw_rate_rps * sh * std::cos(yaw),
             -seg.yaw_rate_rps * sh * std::sin(yaw), 0.0};
  k.yaw = yaw;
  k.yaw_rate = seg.yaw_rate_rps;
  return k;
}

}  // namespace

TruthTrajectory::TruthTrajectory(const Geodetic& start, double heading_rad,
                                 double speed_mps, double climb_mps,
                                 std::vector<TrajectorySegment> segments,
                                 const EarthModel& earth)
    : earth_(earth) {
  if (segments.empty()) {
    throw std::invalid_argument("trajectory needs at least one segment");
  }
  double yaw = heading_rad;
  Eigen::Vector3d vel{speed_mps * std::sin(heading_rad),
                      speed_mps * std::cos(heading_rad), climb_mps};
  Geodetic pos = start;
  double t = 0.0;

  grid_t_.push_back(0.0);
  grid_pos_.push_back(pos);
  grid_vel_.push_back(vel);

  for (const TrajectorySegment& seg : segments) {
    if (seg.duration_s <= 0.0) {
      throw std::invalid_argument("trajectory segment duration must be > 0");
    }
    segments_.push_back({t, yaw, vel, pos, seg});
    breakpoints_.push_back(t);

    // integrate position across the segment on the fine grid (RK4)
    double tau = 0.0;
    while (tau < seg.duration_s - 1.0e-12) {
      const double h = std::min(grid_dt_, seg.duration_s - tau);
      auto rate = [&](double tt, const Geodetic& p) {
        return geodetic_rates(p, kinematics_at(seg, yaw, vel, tt).vel, earth_);
      };
      const Eigen::Vector3d k1 = rate(tau, pos);
      const Geodetic p2{pos.lat + 0.5 * h * k1.x(), pos.lon + 0.5 * h * k1.y(),
                        pos.h + 0.5 * h * k1.z()};
      const Eigen::Vector3d k2 = rate(tau + 0.5 * h, p2);
      const Geodetic p3{pos.lat + 0.5 * h * k2.x(), pos.lon + 0.5 * h * k2.y(),
                        pos.h + 0.5 * h * k2.z()};
      const Eigen::Vector3d k3 = rate(tau + 0.5 * h, p3);
      const Geodetic p4{pos.lat + h * k3.x(), pos.lon + h * k3.y(),
                        pos.h + h * k3.z()};
      const Eigen::Vector3d k4 = rate(tau + h, p4);
      const Eigen::Vector3d d = (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
      pos = {pos.lat + h * d.x(), pos.lon + h * d.y(), pos.h + h * d.z()};
      tau += h;
      grid_t_.push_back(t + tau);
      grid_pos_.push_back(pos);
      grid_vel_.push_back(kinematics_at(seg, yaw, vel, tau).vel);
    }

    const SegmentKinematics end = kinematics_at(seg, yaw, vel, seg.duration_s);
    yaw = end.yaw;
    vel = end.vel;
    t += seg.duration_s;
  }
  duration_ = t;
  breakpoints_.push_back(t);
}

TruthTrajectory::State TruthTrajectory::segment_state(const SegmentState& s,
                                                      double t) const {
  const double tau = t - s.t0;
  const SegmentKinematics k = kinematics_at(s.seg, s.yaw, s.vel, tau);

  // position: single RK4 step from the nearest grid point at or before t
  const auto it = std::upper_bound(grid_t_.begin(), grid_t_.end(), t + 1.0e-12);
  std::size_t idx = static_cast<std::size_t>(it - grid_t_.begin());
  idx = (idx == 0) ? 0 : idx - 1;
  Geodetic pos = grid_pos_[idx];
  const double h = t - grid_t_[idx];
  if (h > 1.0e-12) {
    auto rate = [&](double tt, const Geodetic& p) {
      return geodetic_rates(p, kinematics_at(s.seg, s.yaw, s.vel, tt - s.t0).vel,
                            earth_);
    };
    const double ta = grid_t_[idx];
    const Eigen::Vector3d k1 = rate(ta, pos);
    const Geodetic p2{pos.lat + 0.5 * h * k1.x(), pos.lon + 0.5 * h * k1.y(),
                      pos.h + 0.5 * h * k1.z()};
    const Eigen::Vector3d k2 = rate(ta + 0.5 * h, p2);
    const Geodetic p3{pos.lat + 0.5 * h * k2.x(), pos.lon + 0.5 * h * k2.y(),
                      pos.h + 0.5 * h * k2.z()};
    const Eigen::Vector3d k3 = rate(ta + 0.5 * h, p3);
    const Geodetic p4{pos.lat + h * k3.x(), pos.lon + h * k3.y(),
                      pos.h + h * k3.z()};
    const Eigen::Vector3d k4 = rate(ta + h, p4);
    const Eigen::Vector3d d = (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    pos = {pos.lat + h * d.x(), pos.lon + h * d.y(), pos.h + h * d.z()};
  }

  State st;
  st.c_b_n = attitude_matrix({0.0, 0.0, k.yaw});
  st.vel = k.vel;
  st.pos = pos;
  st.accel = k.accel;
  st.yaw_rate = k.yaw_rate;
  return st;
}

TruthTrajectory::State TruthTrajectory::at(double t) const {
  if (t < -1.0e-9 || t > duration_ + 1.0e-9) {
    throw std::out_of_range("trajectory query outside [0, duration]");
  }
  t = std::clamp(t, 0.0, duration_);
  // half-open segments; the final instant belongs to the last segment
  std::size_t i = segments_.size() - 1;
  for (std::size_t k = 0; k + 1 < segments_.size(); ++k) {
    if (t < segments_[k + 1].t0) {
      i = k;
      break;
    }
  }
  return segment_state(segments_[i], t);
}

NavState TruthTrajectory::initial_nav_state() const {
  const State s = at(0.0);
  NavState n;
  n.c_b_n = s.c_b_n;
  n.vel = s.vel;
  n.pos = s.pos;
  n.t = 0.0;
  return n;
}

Eigen::Vector3d TruthTrajectory::angular_rate_body(double t) const {
  const State s = at(t);
  const Eigen::Vector3d omega_in =
      earth_.omega_ie_enu(s.pos.lat) + earth_.omega_en_enu(s.pos, s.vel);
  // compass yaw rate is a clockwise rotation about the up axis
  const Eigen::Vector3d omega_nb{0.0, 0.0, -s.yaw_rate};
  return s.c_b_n.transpose() * (omega_in + omega_nb);
}

Eigen::Vector3d TruthTrajectory::specific_force_body(double t) const {
  const State s = at(t);
  const Eigen::Vector3d omega_ie = earth_.omega_ie_enu(s.pos.lat);
  const Eigen::Vector3d omega_en = earth_.omega_en_enu(s.pos, s.vel);
  const Eigen::Vector3d f_n = s.accel - gravity_enu(s.pos, earth_) +
                              (2.0 * omega_ie + omega_en).cross(s.vel);
  return s.c_b_n.transpose() * f_n;
}

// ---------------------------------------------------------------------------
// IMU simulation
// ---------------------------------------------------------------------------

namespace {

constexpr double kGaussNodes[5] = {-0.9061798459386640, -0.5384693101056831,
                                   0.0, 0.5384693101056831, 0.9061798459386640};
constexpr double kGaussWeights[5] = {0.2369268850561891, 0.4786286704993665,
                                     0.5688888888888889, 0.4786286704993665,
                                     0.2369268850561891};

template <class F>
Eigen::Vector3d gauss5(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (int i = 0; i < 5; ++i) {
    acc += kGaussWeights[i] * f(mid + half * kGaussNodes[i]);
  }
  return half * acc;
}

// integrate f over [a,b], splitting at trajectory breakpoints so the
// quadrature never straddles a rate discontinuity
template <class F>
Eigen::Vector3d integrate_split(const F& f, double a, double b,
                                const std::vector<double>& breaks) {
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  double lo = a;
  for (double br : breaks) {
    if (br > a + 1.0e-12 && br < b - 1.0e-12) {
      acc += gauss5(f, lo, br);
      lo = br;
    }
  }
  acc += gauss5(f, lo, b);
  return acc;
}

}  // namespace

std::vector<ImuSample> simulate_imu(const TruthTrajectory& truth,
                                    const ImuErrorModel& err, double sample_dt,
                                    double duration) {
  if (sample_dt <= 0.0) {
    throw std::invalid_argument("sample_dt must be > 0");
  }
  const double update_dt = 2.0 * sample_dt;
  const double n_f = duration / update_dt;
  const long n = std::lround(n_f);
  if (n <= 0 || std::abs(n_f - static_cast<double>(n)) > 1.0e-9) {
    throw std::invalid_argument(
        "duration must be a whole number of 2*sample_dt update intervals");
  }
  if (duration > truth.duration() + 1.0e-9) {
    throw std::invalid_argument("trajectory does not cover requested duration");
  }

  Rng rng(err.seed);
  const auto& breaks = truth.breakpoints();
  auto omega = [&](double t) { return truth.angular_rate_body(t); };
  auto force = [&](double t) { return truth.specific_force_body(t); };

  std::vector<ImuSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long m = 0; m < n; ++m) {
    ImuSample s;
    s.t0 = static_cast<double>(m) * update_dt;
    s.t1 = s.t0 + update_dt;
    const double tm = s.t0 + sample_dt;

    Eigen::Vector3d* dth[2] = {&s.dtheta1, &s.dtheta2};
    Eigen::Vector3d* dv[2] = {&s.dvel1, &s.dvel2};
    const double lo[2] = {s.t0, tm};
    const double hi[2] = {tm, s.t1};
    for (int k = 0; k < 2; ++k) {
      *dth[k] = integrate_split(omega, lo[k], hi[k], breaks) +
                err.gyro_bias_rps * sample_dt;
      *dv[k] = integrate_split(force, lo[k], hi[k], breaks) +
               err.accel_bias_mps2 * sample_dt;
      if (err.gyro_noise_rps_sqrthz > 0.0) {
        const double sigma = err.gyro_noise_rps_sqrthz * std::sqrt(sample_dt);
        *dth[k] += sigma * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
      }
      if (err.accel_noise_mps2_sqrthz > 0.0) {
        const double sigma = err.accel_noise_mps2_sqrthz * std::sqrt(sample_dt);
        *dv[k] += sigma * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
      }
    }
    out.push_back(s);
  }
  return out;
}

ImuErrorModel ImuErrorModel::default_grade(std::uint64_t seed) {
  ImuErrorModel m;
  // MEMS-grade constants; calibrated against the reference trajectory, see
  // class comment
  const double dph = M_PI / 180.0 / 3600.0;  // deg/h -> rad/s
  m.gyro_bias_rps = Eigen::Vector3d(1.26, -1.12, 1.40) * dph;
  m.accel_bias_mps2 = Eigen::Vector3d(0.8e-3, 1.0e-3, -0.6e-3);
  m.gyro_noise_rps_sqrthz = 0.1 * dph * 60.0;  // 0.1 deg/sqrt(h)
  m.accel_noise_mps2_sqrthz = 3.0e-4;
  m.seed = seed;
  return m;
}

// ---------------------------------------------------------------------------
// Fleet prediction
// ---------------------------------------------------------------------------

std::vector<std::vector<Eigen::Vector3d>> predict_slot_positions(
    std::span<const UavTrack> fleet, double slot_duration, int n_slots,
    const EarthModel& earth, const EnuFrame& frame) {
  if (fleet.empty() || n_slots < 1 || slot_duration <= 0.0) {
    throw std::invalid_argument("predict_slot_positions: bad arguments");
  }
  std::vector<std::vector<Eigen::Vector3d>> positions(
      static_cast<std::size_t>(n_slots),
      std::vector<Eigen::Vector3d>(fleet.size()));
  std::vector<std::string> errors(fleet.size());

  parallel_for(fleet.size(), [&](std::size_t u) {
    try {
      const UavTrack& track = fleet[u];
      const std::vector<NavState> states =
          dead_reckon(track.init, track.trace, earth);
      for (int k = 0; k < n_slots; ++k) {
        const double t_slot = static_cast<double>(k) * slot_duration;
        if (track.trace.empty()) {
          if (t_slot > 0.0) throw std::runtime_error("empty trace");
          positions[0][u] = frame.to_enu(track.init.pos);
          continue;
        }
        const double update_dt = track.trace.front().t1 - track.trace.front().t0;
        const double idx_f = t_slot / update_dt;
        const long idx = std::lround(idx_f);
        if (std::abs(idx_f - static_cast<double>(idx)) > 1.0e-6 ||
            idx >= static_cast<long>(states.size())) {
          throw std::runtime_error("trace does not cover slot start");
        }
        positions[static_cast<std::size_t>(k)][u] =
            frame.to_enu(states[static_cast<std::size_t>(idx)].pos);
      }
    } catch (const std::exception& e) {
      errors[u] = e.what();
    }
  });

  for (std::size_t u = 0; u < fleet.size(); ++u) {
    if (!errors[u].empty()) {
      throw std::runtime_error("UAV " + std::to_string(u) +
                               " trace unusable: " + errors[u]);
    }
  }
  return positions;
}

}  // namespace eunsim
