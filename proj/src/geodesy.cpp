#include "eunsim/geodesy.hpp"

#include <cmath>

namespace eunsim {

double EarthModel::meridian_radius(double lat) const {
  const double e2 = ecc2();
  const double s = std::sin(lat);
  const double q = 1.0 - e2 * s * s;
  return semi_major_m * (1.0 - e2) / (q * std::sqrt(q));
}

double EarthModel::transverse_radius(double lat) const {
  const double e2 = ecc2();
  const double s = std::sin(lat);
  return semi_major_m / std::sqrt(1.0 - e2 * s * s);
}

double EarthModel::gravity(double lat, double h) const {
  if (gravity_kind == Gravity::constant) {
    return gravity_const_mps2;
  }
  const double s2 = std::sin(lat) * std::sin(lat);
  const double g0 =
      9.7803253359 * (1.0 + 5.27094e-3 * s2 + 2.32718e-5 * s2 * s2);
  return g0 - 3.086e-6 * h;
}

Eigen::Vector3d EarthModel::omega_ie_enu(double lat) const {
  return {0.0, rate_rad_s * std::cos(lat), rate_rad_s * std::sin(lat)};
}

Eigen::Vector3d EarthModel::omega_en_enu(const Geodetic& p,
                                         const Eigen::Vector3d& v) const {
  const double rm = meridian_radius(p.lat) + p.h;
  const double rn = transverse_radius(p.lat) + p.h;
  return {-v.y() / rm, v.x() / rn, v.x() * std::tan(p.lat) / rn};
}

Eigen::Vector3d geodetic_to_ecef(const Geodetic& p, const EarthModel& earth) {
  const double rn = earth.transverse_radius(p.lat);
  const double cl = std::cos(p.lat), sl = std::sin(p.lat);
  const double co = std::cos(p.lon), so = std::sin(p.lon);
  return {(rn + p.h) * cl * co, (rn + p.h) * cl * so,
          (rn * (1.0 - earth.ecc2()) + p.h) * sl};
}

Geodetic ecef_to_geodetic(const Eigen::Vector3d& ecef, const EarthModel& earth) {
  const double e2 = earth.ecc2();
  const double a = earth.semi_major_m;
  const double pxy = std::hypot(ecef.x(), ecef.y());
  Geodetic g;
  g.lon = std::atan2(ecef.y(), ecef.x());
  // Bowring-style fixed point; converges to sub-millimetre in a few rounds
  double lat = std::atan2(ecef.z(), pxy * (1.0 - e2));
  for (int i = 0; i < 8; ++i) {
    const double s = std::sin(lat);
    const double rn = a / std::sqrt(1.0 - e2 * s * s);
    const double h = pxy / std::cos(lat) - rn;
    lat = std::atan2(ecef.z(), pxy * (1.0 - e2 * rn / (rn + h)));
  }
  const double s = std::sin(lat);
  const double rn = a / std::sqrt(1.0 - e2 * s * s);
  g.lat = lat;
  g.h = pxy / std::cos(lat) - rn;
  return g;
}

EnuFrame::EnuFrame(const Geodetic& origin, const EarthModel& earth)
    : origin_(origin), earth_(earth), origin_ecef_(geodetic_to_ecef(origin, earth)) {
  const double cl = std::cos(origin.lat), sl = std::sin(origin.lat);
  const double co = std::cos(origin.lon), so = std::sin(origin.lon);
  ecef_to_enu_ << -so, co, 0.0,
      -sl * co, -sl * so, cl,
      cl * co, cl * so, sl;
}

Eigen::Vector3d EnuFrame::to_enu(const Geodetic& p) const {
  return ecef_to_enu_ * (geodetic_to_ecef(p, earth_) - origin_ecef_);
}

Geodetic EnuFrame::to_geodetic(const Eigen::Vector3d& enu) const {
  return ecef_to_geodetic(origin_ecef_ + ecef_to_enu_.transpose() * enu, earth_);
}

}  // namespace eunsim
