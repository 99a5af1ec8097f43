#pragma once

#include <array>

#include <Eigen/Core>

namespace consensus {

/// Below this angle the axis-angle map switches to its second-order Taylor form.
inline constexpr double kSmallAngle = 1e-8;

Eigen::Matrix3d skew(const Eigen::Vector3d& w);

/// Rotation matrix for an axis-angle vector.
Eigen::Matrix3d rodrigues(const Eigen::Vector3d& omega);

struct RotationJacobian {
  Eigen::Matrix3d R;
  std::array<Eigen::Matrix3d, 3> dR;  // dR[i] = dR / d omega_i
};

RotationJacobian rodrigues_with_jacobian(const Eigen::Vector3d& omega);

/// Same rotation with angle wrapped into [0, pi].
Eigen::Vector3d canonicalize_axis_angle(const Eigen::Vector3d& omega);

}  // namespace consensus
