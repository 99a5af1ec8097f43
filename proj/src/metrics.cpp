#include "consensus_mesh/metrics.h"

#include <cmath>

#include <Eigen/SVD>

#include "consensus_mesh/errors.h"

namespace consensus {

namespace {

void check_pair(const Vertices& pred, const Vertices& gt) {
  if (pred.rows() != gt.rows()) throw InvalidArgument("skeletons have different joint counts");
  if (pred.rows() == 0) throw InvalidArgument("skeletons are empty");
  if (!pred.allFinite() || !gt.allFinite()) throw InvalidArgument("skeletons contain non-finite values");
}

double mean_distance(const Vertices& a, const Vertices& b) { return (a - b).rowwise().norm().mean(); }

}  // namespace

double mpjpe(const Vertices& pred, const Vertices& gt) {
  check_pair(pred, gt);
  Vertices p = pred.rowwise() - pred.row(0);
  Vertices g = gt.rowwise() - gt.row(0);
  return mean_distance(p, g);
}

Similarity procrustes_align(const Vertices& pred, const Vertices& gt) {
  check_pair(pred, gt);
  const Eigen::RowVector3d mu_p = pred.colwise().mean();
  const Eigen::RowVector3d mu_g = gt.colwise().mean();
  const Vertices P = pred.rowwise() - mu_p;
  const Vertices G = gt.rowwise() - mu_g;
  const double norm_p = P.squaredNorm();

  Eigen::JacobiSVD<Eigen::MatrixXd> shape_svd(P, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto sv = shape_svd.singularValues();
  if (sv.size() < 2 || sv(0) == 0.0 || sv(1) <= 1e-9 * sv(0))
    throw DegenerateConfiguration("procrustes alignment needs at least 3 non-collinear joints");

  const Eigen::Matrix3d H = P.transpose() * G;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d U = svd.matrixU(), V = svd.matrixV();
  Eigen::Vector3d d(1.0, 1.0, (V * U.transpose()).determinant() < 0.0 ? -1.0 : 1.0);
  Similarity out;
  out.rotation = V * d.asDiagonal() * U.transpose();
  out.scale = svd.singularValues().dot(d) / norm_p;
  out.translation = mu_g.transpose() - out.scale * out.rotation * mu_p.transpose();
  out.aligned = ((out.scale * pred * out.rotation.transpose()).rowwise() + out.translation.transpose());
  return out;
}

double pa_mpjpe(const Vertices& pred, const Vertices& gt) { return mean_distance(procrustes_align(pred, gt).aligned, gt); }

SegMetrics seg_metrics(const LabelMap& pred, const LabelMap& gt, int num_classes) {
  if (pred.width != gt.width || pred.height != gt.height || pred.labels.size() != gt.labels.size())
    throw ResolutionMismatch("label maps have different resolutions");
  if (num_classes < 0) throw InvalidArgument("number of classes must be nonnegative");
  const int C = num_classes + 1;
  std::vector<long> tp(C, 0), fp(C, 0), fn(C, 0);
  long correct = 0;
  for (size_t i = 0; i < pred.labels.size(); ++i) {
    const int p = pred.labels[i], g = gt.labels[i];
    if (p == g) {
      ++correct;
      if (p >= 0 && p < C) ++tp[p];
    } else {
      if (p >= 0 && p < C) ++fp[p];
      if (g >= 0 && g < C) ++fn[g];
    }
  }
  SegMetrics out;
  out.accuracy = pred.labels.empty() ? 1.0 : static_cast<double>(correct) / static_cast<double>(pred.labels.size());
  out.per_class_f1.resize(C);
  double sum = 0.0;
  for (int c = 0; c < C; ++c) {
    const long denom = 2 * tp[c] + fp[c] + fn[c];
    out.per_class_f1[c] = denom == 0 ? 1.0 : 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
    sum += out.per_class_f1[c];
  }
  out.macro_f1 = sum / C;
  return out;
}

}  // namespace consensus
