#include "consensus_mesh/objectives.h"

#include <algorithm>
#include <cmath>

#include "consensus_mesh/errors.h"

namespace consensus {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

double mean_shape_weight(const LossWeights& weights, int iter, int warmup) {
  if (warmup <= 0) return 0.0;
  return weights.mean_shape * std::max(0.0, 1.0 - static_cast<double>(iter) / warmup);
}

double loss_color_consistency(const ColoredMesh& a, const ColoredMesh& b, const Eigen::VectorXd& W_a,
                              const Eigen::VectorXd& W_b, double lambda, ColorConsistencyGradient* grad) {
  const Eigen::Index K = a.C.rows();
  if (b.C.rows() != K || W_a.size() != K || W_b.size() != K)
    throw InvalidArgument("color consistency: vertex counts differ");
  const double n = 3.0 * static_cast<double>(K);
  const Colors dC = a.C - b.C;
  const Colors dT = a.C_tilde - b.C_tilde;
  const Eigen::VectorXd ww = W_a.cwiseProduct(W_b);
  const Colors e = dT.array().colwise() * ww.array();
  const double value = dC.squaredNorm() / n + lambda * e.squaredNorm() / n;
  if (grad) {
    grad->C_a = 2.0 / n * dC;
    grad->C_b = -grad->C_a;
    Colors gT = 2.0 * lambda / n * (e.array().colwise() * ww.array());
    grad->C_tilde_a = gT;
    grad->C_tilde_b = -gT;
    const Eigen::VectorXd edot = 2.0 * lambda / n * (e.cwiseProduct(dT)).rowwise().sum();
    grad->W_a = edot.cwiseProduct(W_b);
    grad->W_b = edot.cwiseProduct(W_a);
  }
  return value;
}

double loss_part_prototype(const PartPrototypes& a, const PartPrototypes& b, Eigen::MatrixXd* grad_a,
                           Eigen::MatrixXd* grad_b) {
  if (a.F.rows() != b.F.rows() || a.F.cols() != b.F.cols())
    throw InvalidArgument("part prototype loss: prototype shapes differ");
  const Eigen::Index L = a.F.rows(), d = a.F.cols();
  int common = 0;
  for (Eigen::Index l = 0; l < L; ++l) common += a.observed[l] && b.observed[l];
  if (common == 0) throw NoCommonParts("no body part is observed in both images");
  if (grad_a) grad_a->setZero(L, d);
  if (grad_b) grad_b->setZero(L, d);
  const double norm = static_cast<double>(common) * static_cast<double>(d);
  double value = 0.0;
  for (Eigen::Index l = 0; l < L; ++l) {
    if (!(a.observed[l] && b.observed[l])) continue;
    const Eigen::RowVectorXd diff = a.F.row(l) - b.F.row(l);
    value += diff.squaredNorm() / norm;
    if (grad_a) grad_a->row(l) = 2.0 / norm * diff;
    if (grad_b) grad_b->row(l) = -2.0 / norm * diff;
  }
  return value;
}

double loss_shape_consistency(const ShapeVector& beta_a, const ShapeVector& beta_b, ShapeVector* grad_a,
                              ShapeVector* grad_b) {
  const ShapeVector diff = beta_a - beta_b;
  if (grad_a || grad_b) {
    ShapeVector g = diff.unaryExpr([](double x) { return sign(x); }) / kShapeDim;
    if (grad_a) *grad_a = g;
    if (grad_b) *grad_b = -g;
  }
  return diff.cwiseAbs().sum() / kShapeDim;
}

double loss_mean_shape(const ShapeVector& beta, ShapeVector* grad) {
  if (grad) *grad = beta.unaryExpr([](double x) { return sign(x); }) / kShapeDim;
  return beta.cwiseAbs().sum() / kShapeDim;
}

double loss_silhouette(const Mask& soft, const Mask& target, Mask* grad) {
  if (!(soft.size() == target.size())) throw ResolutionMismatch("silhouette loss: mask resolutions differ");
  const size_t n = soft.data().size();
  if (grad) *grad = Mask(soft.width(), soft.height());
  if (n == 0) return 0.0;
  double value = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = soft.data()[i] - target.data()[i];
    value += d * d;
    if (grad) grad->data()[i] = 2.0 * d / static_cast<double>(n);
  }
  return value / static_cast<double>(n);
}

double loss_mse(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::MatrixXd>& b,
                Eigen::MatrixXd* grad_a) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidArgument("mse: shapes differ");
  const double n = static_cast<double>(a.size());
  if (n == 0) {
    if (grad_a) grad_a->setZero(a.rows(), a.cols());
    return 0.0;
  }
  const Eigen::MatrixXd diff = a - b;
  if (grad_a) *grad_a = 2.0 / n * diff;
  return diff.squaredNorm() / n;
}

}  // namespace consensus
