#include "consensus_mesh/rotation.h"

#include <cmath>
#include <numbers>

namespace consensus {

namespace {

struct Coefficients {
  double a;   // sin(t) / t
  double b;   // (1 - cos(t)) / t^2
  double da;  // (da/dt) / t
  double db;  // (db/dt) / t
};

Coefficients coefficients(double t2) {
  Coefficients c;
  double t = std::sqrt(t2);
  if (t < kSmallAngle) {
    c.a = 1.0 - t2 / 6.0;
    c.b = 0.5 - t2 / 24.0;
    c.da = -1.0 / 3.0;
    c.db = -1.0 / 12.0;
    return c;
  }
  double s = std::sin(t);
  double co = std::cos(t);
  c.a = s / t;
  c.b = (1.0 - co) / t2;
  if (t < 1e-2) {
    // closed forms below cancel catastrophically for small t
    double t4 = t2 * t2;
    c.da = -1.0 / 3.0 + t2 / 30.0 - t4 / 840.0;
    c.db = -1.0 / 12.0 + t2 / 180.0 - t4 / 6720.0;
  } else {
    c.da = (t * co - s) / (t2 * t);
    c.db = (t * s - 2.0 * (1.0 - co)) / (t2 * t2);
  }
  return c;
}

}  // namespace

Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
  Eigen::Matrix3d K;
  K << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return K;
}

Eigen::Matrix3d rodrigues(const Eigen::Vector3d& omega) {
  Coefficients c = coefficients(omega.squaredNorm());
  Eigen::Matrix3d K = skew(omega);
  return Eigen::Matrix3d::Identity() + c.a * K + c.b * K * K;
}

RotationJacobian rodrigues_with_jacobian(const Eigen::Vector3d& omega) {
  Coefficients c = coefficients(omega.squaredNorm());
  Eigen::Matrix3d K = skew(omega);
  Eigen::Matrix3d K2 = K * K;
  RotationJacobian out;
  out.R = Eigen::Matrix3d::Identity() + c.a * K + c.b * K2;
  for (int i = 0; i < 3; ++i) {
    Eigen::Matrix3d E = skew(Eigen::Vector3d::Unit(i));
    out.dR[i] = c.da * omega[i] * K + c.a * E + c.db * omega[i] * K2 + c.b * (E * K + K * E);
  }
  return out;
}

Eigen::Vector3d canonicalize_axis_angle(const Eigen::Vector3d& omega) {
  double t = omega.norm();
  if (t <= std::numbers::pi) return omega;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(t, two_pi);
  if (wrapped > std::numbers::pi) wrapped -= two_pi;
  return omega * (wrapped / t);
}

}  // namespace consensus
