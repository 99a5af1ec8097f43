#pragma once

#include <Eigen/Core>

#include "consensus_mesh/color_recovery.h"
#include "consensus_mesh/raster.h"
#include "consensus_mesh/types.h"

namespace consensus {

/// Every norm-style loss is a mean squared error over elements, except the
/// shape terms which are mean absolute values.
struct LossWeights {
  double color = 1.0;       // w_CC
  double lambda = 1.0;      // inner weight of the C~ term
  double part = 1.0;        // w_P
  double shape = 0.1;       // w_beta
  double silhouette = 1.0;  // w_sil
  double mean_shape = 0.1;  // w_mean at iteration 0
  double mv_mesh = 0.0;
  double mv_pose = 0.0;
  double kp2d = 0.0;
};

/// w_mean(iter) = w_mean0 * max(0, 1 - iter / warmup).
double mean_shape_weight(const LossWeights& weights, int iter, int warmup);

struct ColorConsistencyGradient {
  Colors C_a, C_b;
  Colors C_tilde_a, C_tilde_b;
  Eigen::VectorXd W_a, W_b;
};

/// L_C + lambda * L_C~ with L_C = mse(C_a, C_b), L_C~ = mse(W_a W_b (C~_a - C~_b), 0).
double loss_color_consistency(const ColoredMesh& a, const ColoredMesh& b, const Eigen::VectorXd& W_a,
                              const Eigen::VectorXd& W_b, double lambda, ColorConsistencyGradient* grad = nullptr);

/// Mean over co-observed parts of the per-part feature MSE. Throws
/// NoCommonParts when no part is observed in both images.
double loss_part_prototype(const PartPrototypes& a, const PartPrototypes& b, Eigen::MatrixXd* grad_a = nullptr,
                           Eigen::MatrixXd* grad_b = nullptr);

/// mean |beta_a - beta_b|; the subgradient at ties is 0.
double loss_shape_consistency(const ShapeVector& beta_a, const ShapeVector& beta_b, ShapeVector* grad_a = nullptr,
                              ShapeVector* grad_b = nullptr);

/// mean |beta|.
double loss_mean_shape(const ShapeVector& beta, ShapeVector* grad = nullptr);

/// Mean squared per-pixel difference; gradient w.r.t. the soft mask.
double loss_silhouette(const Mask& soft, const Mask& target, Mask* grad = nullptr);

/// Mean squared difference of two equally sized matrices (mesh, skeleton or
/// landmark supervision); gradient w.r.t. a.
double loss_mse(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::MatrixXd>& b,
                Eigen::MatrixXd* grad_a = nullptr);

}  // namespace consensus
