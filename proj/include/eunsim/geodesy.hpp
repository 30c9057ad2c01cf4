#pragma once

#include <Eigen/Dense>

namespace eunsim {

// Geodetic position: latitude, longitude in radians, height in metres above
// the ellipsoid.
struct Geodetic {
  double lat = 0.0;
  double lon = 0.0;
  double h = 0.0;
};

// Reference ellipsoid plus gravity and rotation-rate models. Navigation math
// is written against this so the unit tests can switch to an idealised
// non-rotating flat earth where closed-form expectations hold exactly.
struct EarthModel {
  enum class Gravity { normal, constant };

  double semi_major_m = 6378137.0;
  double flattening = 1.0 / 298.257223563;
  double rate_rad_s = 7.292115e-5;
  Gravity gravity_kind = Gravity::normal;
  double gravity_const_mps2 = 9.80665;

  static EarthModel wgs84() { return EarthModel{}; }

  // Zero rotation, constant gravity, curvature pushed out to an effectively
  // infinite radius. Geodetic positions become degenerate in lat/lon under
  // this model; it exists for mechanization unit tests only.
  static EarthModel flat_non_rotating(double g = 9.80665) {
    EarthModel e;
    e.semi_major_m = 1.0e18;
    e.flattening = 0.0;
    e.rate_rad_s = 0.0;
    e.gravity_kind = Gravity::constant;
    e.gravity_const_mps2 = g;
    return e;
  }

  double ecc2() const { return flattening * (2.0 - flattening); }

  // meridian radius of curvature R_M
  double meridian_radius(double lat) const;
  // transverse (prime vertical) radius of curvature R_N
  double transverse_radius(double lat) const;
  // local gravity magnitude, positive down
  double gravity(double lat, double h) const;

  // earth rotation rate in the local ENU frame
  Eigen::Vector3d omega_ie_enu(double lat) const;
  // transport rate of the local frame for velocity v = [V_E, V_N, V_U]
  Eigen::Vector3d omega_en_enu(const Geodetic& p, const Eigen::Vector3d& v) const;
};

Eigen::Vector3d geodetic_to_ecef(const Geodetic& p, const EarthModel& earth);
Geodetic ecef_to_geodetic(const Eigen::Vector3d& ecef, const EarthModel& earth);

// Local east-north-up Cartesian frame anchored at a geodetic origin.
class EnuFrame {
 public:
  EnuFrame() = default;
  EnuFrame(const Geodetic& origin, const EarthModel& earth);

  Eigen::Vector3d to_enu(const Geodetic& p) const;
  Geodetic to_geodetic(const Eigen::Vector3d& enu) const;
  const Geodetic& origin() const { return origin_; }

 private:
  Geodetic origin_;
  EarthModel earth_;
  Eigen::Vector3d origin_ecef_ = Eigen::Vector3d::Zero();
  Eigen::Matrix3d ecef_to_enu_ = Eigen::Matrix3d::Identity();
};

}  // namespace eunsim
