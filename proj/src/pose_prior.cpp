#include "consensus_mesh/pose_prior.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "consensus_mesh/errors.h"

namespace consensus {

PosePrior fit_prior(const std::vector<Eigen::VectorXd>& poses) {
  if (static_cast<int>(poses.size()) < kMinPriorPoses)
    throw InsufficientData("pose prior needs at least " + std::to_string(kMinPriorPoses) + " poses, got " +
                           std::to_string(poses.size()));
  const int n = static_cast<int>(poses.size());
  const int D = static_cast<int>(poses.front().size());
  Eigen::MatrixXd X(n, D);
  for (int i = 0; i < n; ++i) {
    if (poses[i].size() != D) throw InvalidArgument("pose prior: poses differ in dimension");
    X.row(i) = poses[i].transpose();
  }
  PosePrior prior;
  prior.mean = X.colwise().mean().transpose();
  X.rowwise() -= prior.mean.transpose();
  const Eigen::MatrixXd cov = X.transpose() * X / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  std::vector<int> order(D);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return eig.eigenvalues()(a) > eig.eigenvalues()(b); });

  prior.basis = Eigen::MatrixXd::Zero(D, kLatentDim);
  prior.scale = Eigen::VectorXd::Zero(kLatentDim);
  for (int c = 0; c < std::min(D, kLatentDim); ++c) {
    Eigen::VectorXd axis = eig.eigenvectors().col(order[c]);
    Eigen::Index big;
    axis.cwiseAbs().maxCoeff(&big);
    if (axis(big) < 0.0) axis = -axis;
    prior.basis.col(c) = axis;
    prior.scale(c) = 2.5 * std::sqrt(std::max(0.0, eig.eigenvalues()(order[c])));
  }
  return prior;
}

Eigen::VectorXd decode_pose(const PosePrior& prior, const LatentVector& phi) {
  return prior.mean + prior.basis * prior.scale.cwiseProduct(phi);
}

LatentVector encode_pose(const PosePrior& prior, const Eigen::VectorXd& theta) {
  Eigen::VectorXd proj = prior.basis.transpose() * (theta - prior.mean);
  LatentVector phi = LatentVector::Zero();
  for (int c = 0; c < kLatentDim; ++c)
    if (prior.scale(c) > 0.0) phi(c) = proj(c) / prior.scale(c);
  return phi;
}

Eigen::MatrixXd decode_jacobian(const PosePrior& prior) { return prior.basis * prior.scale.asDiagonal(); }

}  // namespace consensus
