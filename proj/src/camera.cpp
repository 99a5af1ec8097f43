#include "consensus_mesh/camera.h"

#include <cmath>

#include "consensus_mesh/errors.h"
#include "consensus_mesh/rotation.h"

namespace consensus {

void validate(const CameraParams& cam) {
  if (!cam.rot.allFinite() || !cam.t.allFinite() || !std::isfinite(cam.s))
    throw InvalidArgument("camera parameters must be finite");
  if (!(cam.s > 0.0)) throw InvalidArgument("camera scale must be positive");
}

Projection project(const CameraParams& cam, const Vertices& V) {
  const Eigen::Matrix3d R = rodrigues(cam.rot);
  Projection out;
  out.X = V * R.transpose();
  out.v.resize(V.rows(), 2);
  out.v.col(0) = cam.s * out.X.col(0).array() + cam.t.x();
  out.v.col(1) = cam.s * out.X.col(1).array() + cam.t.y();
  out.Z = out.X.col(2);
  return out;
}

Eigen::Matrix<double, 3, 9> point_jacobian(const CameraParams& cam, const Eigen::Vector3d& p) {
  const RotationJacobian rj = rodrigues_with_jacobian(cam.rot);
  const Eigen::Vector3d X = rj.R * p;
  Eigen::Matrix<double, 3, 9> J = Eigen::Matrix<double, 3, 9>::Zero();
  Eigen::Vector3d scale(cam.s, cam.s, 1.0);
  J.block<3, 3>(0, 0) = scale.asDiagonal() * rj.R;
  for (int i = 0; i < 3; ++i) J.block<3, 1>(0, 3 + i) = scale.asDiagonal() * (rj.dR[i] * p);
  J(0, 6) = 1.0;
  J(1, 7) = 1.0;
  J(0, 8) = X.x();
  J(1, 8) = X.y();
  return J;
}

CameraGradient project_backward(const CameraParams& cam, const Vertices& V, const Points2& grad_v,
                                const Eigen::VectorXd& grad_Z, Vertices* grad_V) {
  const RotationJacobian rj = rodrigues_with_jacobian(cam.rot);
  CameraGradient g;
  // dL/dX for the camera-space points, then X = R p.
  Vertices gX(V.rows(), 3);
  gX.col(0) = cam.s * grad_v.col(0);
  gX.col(1) = cam.s * grad_v.col(1);
  gX.col(2) = grad_Z;
  const Vertices X = V * rj.R.transpose();
  g.t = grad_v.colwise().sum().transpose();
  g.s = (grad_v.array() * X.leftCols<2>().array()).sum();
  // sum_k gX_k^T dR_i p_k = trace(dR_i^T * (gX^T V))
  const Eigen::Matrix3d M = gX.transpose() * V;
  for (int i = 0; i < 3; ++i) g.rot(i) = (rj.dR[i].array() * M.array()).sum();
  if (grad_V) *grad_V += gX * rj.R;
  return g;
}

Eigen::VectorXd camera_normals(const CameraParams& cam, const Vertices& normals) {
  const Eigen::Matrix3d R = rodrigues(cam.rot);
  return -(normals * R.row(2).transpose());
}

Eigen::Vector3d camera_normals_backward(const CameraParams& cam, const Vertices& normals,
                                        const Eigen::VectorXd& grad_N, Vertices* grad_normals) {
  const RotationJacobian rj = rodrigues_with_jacobian(cam.rot);
  Eigen::Vector3d g;
  const Eigen::RowVector3d weighted = grad_N.transpose() * normals;
  for (int i = 0; i < 3; ++i) g(i) = -rj.dR[i].row(2).dot(weighted);
  if (grad_normals) *grad_normals -= grad_N * rj.R.row(2);
  return g;
}

}  // namespace consensus
