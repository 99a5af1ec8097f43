#pragma once

#include <Eigen/Core>

#include "consensus_mesh/types.h"

namespace consensus {

/// Weak-perspective camera: v = s * (R p)_xy + t, Z = (R p)_z. The camera
/// looks along +Z, so smaller Z is closer.
struct CameraParams {
  Eigen::Vector3d rot = Eigen::Vector3d::Zero();  // axis-angle
  Eigen::Vector2d t = Eigen::Vector2d::Zero();    // image units
  double s = 1.0;
};

/// Throws InvalidArgument unless s > 0 and all fields are finite.
void validate(const CameraParams& cam);

struct Projection {
  Points2 v;          // K x 2 image coordinates
  Eigen::VectorXd Z;  // K camera-space depths
  Vertices X;         // K x 3 camera-space points R p
};

Projection project(const CameraParams& cam, const Vertices& V);

/// Jacobian of (v_x, v_y, Z) for one point w.r.t. (p, rot, t, s).
Eigen::Matrix<double, 3, 9> point_jacobian(const CameraParams& cam, const Eigen::Vector3d& p);

struct CameraGradient {
  Eigen::Vector3d rot = Eigen::Vector3d::Zero();
  Eigen::Vector2d t = Eigen::Vector2d::Zero();
  double s = 0.0;

  CameraGradient& operator+=(const CameraGradient& o) {
    rot += o.rot;
    t += o.t;
    s += o.s;
    return *this;
  }
};

/// Reverse mode of project: accumulates dL/dV into grad_V (if non-null) and
/// returns dL/dcamera.
CameraGradient project_backward(const CameraParams& cam, const Vertices& V, const Points2& grad_v,
                                const Eigen::VectorXd& grad_Z, Vertices* grad_V);

/// Facing scores N = -(R n)_z; positive means the normal points at the camera.
Eigen::VectorXd camera_normals(const CameraParams& cam, const Vertices& normals);

/// Reverse mode of camera_normals: accumulates dL/dn into grad_normals (if
/// non-null) and returns dL/drot.
Eigen::Vector3d camera_normals_backward(const CameraParams& cam, const Vertices& normals,
                                        const Eigen::VectorXd& grad_N, Vertices* grad_normals);

}  // namespace consensus
