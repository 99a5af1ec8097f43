#pragma once

#include <vector>

#include <Eigen/Core>

#include "consensus_mesh/types.h"

namespace consensus {

/// Linear pose decoder fitted by PCA in axis-angle space:
/// theta = mean + basis * (scale .* phi), phi in [-1, 1]^32.
struct PosePrior {
  Eigen::VectorXd mean;   // 3J
  Eigen::MatrixXd basis;  // 3J x 32, orthonormal columns (zero columns when 3J < 32)
  Eigen::VectorXd scale;  // 32, 2.5 x per-component standard deviation

  int pose_dim() const { return static_cast<int>(mean.size()); }
};

inline constexpr int kMinPriorPoses = 64;

/// Throws InsufficientData for fewer than 64 poses.
PosePrior fit_prior(const std::vector<Eigen::VectorXd>& poses);

Eigen::VectorXd decode_pose(const PosePrior& prior, const LatentVector& phi);

/// Least-squares latent for a pose (components with zero scale map to 0).
LatentVector encode_pose(const PosePrior& prior, const Eigen::VectorXd& theta);

/// d theta / d phi = basis * diag(scale).
Eigen::MatrixXd decode_jacobian(const PosePrior& prior);

}  // namespace consensus
