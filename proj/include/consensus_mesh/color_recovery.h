#pragma once

#include <vector>

#include <Eigen/Core>

#include "consensus_mesh/body_model.h"
#include "consensus_mesh/raster.h"
#include "consensus_mesh/types.h"

namespace consensus {

/// Visibility-mass threshold below which a group or part counts as unobserved.
inline constexpr double kVisibilityEpsilon = 1e-3;

struct VisibilityOptions {
  double alpha = 50.0;  // per depth unit
  double gamma = 20.0;
  double depth_unit = 1.0;  // depth differences are divided by this (the body height for fitting)
};

/// W = exp(-alpha * D) * sigmoid(gamma * N), D = sqrt(r^2 + 1e-12) with
/// r = (I_z(v) - Z) / depth_unit.
struct VisibilityWeights {
  Eigen::VectorXd W;
  Eigen::VectorXd D;
  double alpha = 50.0;
  double gamma = 20.0;
  double depth_unit = 1.0;
  // Cached for the backward pass.
  Eigen::VectorXd residual;  // r
  Points2 depth_gradient;    // d r / d v
  Eigen::VectorXd facing;    // sigmoid(gamma * N)
};

VisibilityWeights visibility(const DepthMap& depth, const Points2& v, const Eigen::VectorXd& Z,
                             const Eigen::VectorXd& N, const VisibilityOptions& options = {});

struct VisibilityGradient {
  Points2 v;
  Eigen::VectorXd Z;
  Eigen::VectorXd N;
};

/// Depth map held constant: gradients flow through v (sampling position),
/// Z and N only.
VisibilityGradient visibility_backward(const VisibilityWeights& vis, const Eigen::VectorXd& grad_W);

/// C~ = I(v) * (2W - 1).
struct PickedColors {
  Colors C_tilde;
  Colors samples;   // I(v)
  Colors sample_dx;  // d I / d v_x
  Colors sample_dy;  // d I / d v_y
};

PickedColors pick_colors(const ImageRGB& image, const Points2& v, const Eigen::VectorXd& W);

struct PickGradient {
  Points2 v;
  Eigen::VectorXd W;
};

PickGradient pick_colors_backward(const PickedColors& picked, const Eigen::VectorXd& W, const Colors& grad_C_tilde);

struct ColoredMesh {
  Colors C_tilde;               // K x 3 intermediate colors
  Colors group_colors;          // G x 3
  Colors C;                     // K x 3 final colors
  std::vector<char> observed;   // per group
  Colors numerator;             // G x 3, sum of ReLU(C~)
  Eigen::VectorXd denominator;  // G, sum of ReLU(2W - 1)
};

/// Group color = sum ReLU(C~) / sum ReLU(2W - 1) over the group; groups whose
/// denominator is below kVisibilityEpsilon take the fallback color. When
/// `observed` is given it overrides the threshold test.
ColoredMesh propagate_symmetry(const Colors& C_tilde, const Eigen::VectorXd& W, const SymmetryEncoding& symmetry,
                               const Eigen::Vector3d& fallback = Eigen::Vector3d::Constant(0.5),
                               const std::vector<char>* observed = nullptr);

struct PropagateGradient {
  Colors C_tilde;
  Eigen::VectorXd W;
};

/// Maps dL/dC to dL/dC~ and dL/dW. Unobserved groups pass no gradient.
PropagateGradient propagate_symmetry_backward(const ColoredMesh& mesh, const Eigen::VectorXd& W,
                                              const SymmetryEncoding& symmetry, const Colors& grad_C);

/// Visibility-weighted mean feature per part.
struct PartPrototypes {
  Eigen::MatrixXd F;              // L x d
  Eigen::VectorXd weight_sum;     // L
  std::vector<char> observed;     // weight_sum >= kVisibilityEpsilon
  Eigen::MatrixXd samples;        // K x d, H(v)
  Eigen::MatrixXd sample_dx;      // K x d
  Eigen::MatrixXd sample_dy;      // K x d
};

PartPrototypes part_prototypes(const FeatureMap& features, const Points2& v, const Eigen::VectorXd& W,
                               const PartTable& parts, const std::vector<char>* observed = nullptr);

struct PrototypeGradient {
  Points2 v;
  Eigen::VectorXd W;
};

PrototypeGradient part_prototypes_backward(const PartPrototypes& protos, const Eigen::VectorXd& W,
                                           const PartTable& parts, const Eigen::MatrixXd& grad_F);

/// Generic 9-channel feature map at half resolution: RGB, RGB blurred with a
/// Gaussian (sigma 2 px), and per-channel gradient magnitude.
FeatureMap builtin_features(const ImageRGB& image);

}  // namespace consensus
