#include "consensus_mesh/color_recovery.h"

#include <cmath>

#include "consensus_mesh/errors.h"

namespace consensus {

namespace {

constexpr double kAbsSmoothing = 1e-12;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

VisibilityWeights visibility(const DepthMap& depth, const Points2& v, const Eigen::VectorXd& Z,
                             const Eigen::VectorXd& N, const VisibilityOptions& options) {
  if (!(options.alpha > 0.0) || !(options.gamma > 0.0)) throw InvalidArgument("visibility: alpha and gamma must be positive");
  if (!(options.depth_unit > 0.0)) throw InvalidArgument("visibility: depth unit must be positive");
  const double inv_unit = 1.0 / options.depth_unit;
  const int K = static_cast<int>(v.rows());
  if (Z.size() != K || N.size() != K) throw InvalidArgument("visibility: v, Z and N sizes differ");
  VisibilityWeights out;
  out.alpha = options.alpha;
  out.gamma = options.gamma;
  out.depth_unit = options.depth_unit;
  out.W.resize(K);
  out.D.resize(K);
  out.residual.resize(K);
  out.depth_gradient.resize(K, 2);
  out.facing.resize(K);
  for (int k = 0; k < K; ++k) {
    double value, dx, dy;
    sample_bilinear(depth, v.row(k).transpose(), &value, &dx, &dy);
    const double r = (value - Z(k)) * inv_unit;
    out.residual(k) = r;
    out.depth_gradient(k, 0) = dx * inv_unit;
    out.depth_gradient(k, 1) = dy * inv_unit;
    out.D(k) = std::sqrt(r * r + kAbsSmoothing);
    out.facing(k) = sigmoid(options.gamma * N(k));
    out.W(k) = std::exp(-options.alpha * out.D(k)) * out.facing(k);
  }
  return out;
}

VisibilityGradient visibility_backward(const VisibilityWeights& vis, const Eigen::VectorXd& grad_W) {
  const int K = static_cast<int>(vis.W.size());
  VisibilityGradient g{Points2::Zero(K, 2), Eigen::VectorXd::Zero(K), Eigen::VectorXd::Zero(K)};
  for (int k = 0; k < K; ++k) {
    const double gw = grad_W(k);
    if (gw == 0.0) continue;
    const double dW_dr = -vis.alpha * vis.W(k) * vis.residual(k) / vis.D(k);
    g.v.row(k) = gw * dW_dr * vis.depth_gradient.row(k);
    g.Z(k) = -gw * dW_dr / vis.depth_unit;
    const double s = vis.facing(k);
    g.N(k) = gw * std::exp(-vis.alpha * vis.D(k)) * vis.gamma * s * (1.0 - s);
  }
  return g;
}

PickedColors pick_colors(const ImageRGB& image, const Points2& v, const Eigen::VectorXd& W) {
  const int K = static_cast<int>(v.rows());
  if (W.size() != K) throw InvalidArgument("pick_colors: v and W sizes differ");
  if (image.channels() != 3) throw InvalidArgument("pick_colors: image must have 3 channels");
  PickedColors out{Colors(K, 3), Colors(K, 3), Colors(K, 3), Colors(K, 3)};
  for (int k = 0; k < K; ++k) {
    double value[3], dx[3], dy[3];
    sample_bilinear(image, v.row(k).transpose(), value, dx, dy);
    const double scale = 2.0 * W(k) - 1.0;
    for (int c = 0; c < 3; ++c) {
      out.samples(k, c) = value[c];
      out.sample_dx(k, c) = dx[c];
      out.sample_dy(k, c) = dy[c];
      out.C_tilde(k, c) = value[c] * scale;
    }
  }
  return out;
}

PickGradient pick_colors_backward(const PickedColors& picked, const Eigen::VectorXd& W, const Colors& grad_C_tilde) {
  const int K = static_cast<int>(W.size());
  PickGradient g{Points2(K, 2), Eigen::VectorXd(K)};
  for (int k = 0; k < K; ++k) {
    const double scale = 2.0 * W(k) - 1.0;
    g.W(k) = 2.0 * grad_C_tilde.row(k).dot(picked.samples.row(k));
    g.v(k, 0) = scale * grad_C_tilde.row(k).dot(picked.sample_dx.row(k));
    g.v(k, 1) = scale * grad_C_tilde.row(k).dot(picked.sample_dy.row(k));
  }
  return g;
}

ColoredMesh propagate_symmetry(const Colors& C_tilde, const Eigen::VectorXd& W, const SymmetryEncoding& symmetry,
                               const Eigen::Vector3d& fallback, const std::vector<char>* observed) {
  const int K = static_cast<int>(C_tilde.rows());
  const int G = symmetry.size();
  if (W.size() != K) throw InvalidArgument("propagate_symmetry: C~ and W sizes differ");
  if (observed && static_cast<int>(observed->size()) != G)
    throw InvalidArgument("propagate_symmetry: observed flags do not match the group count");
  ColoredMesh out;
  out.C_tilde = C_tilde;
  out.group_colors.resize(G, 3);
  out.numerator = Colors::Zero(G, 3);
  out.denominator = Eigen::VectorXd::Zero(G);
  out.observed.assign(G, 0);
  out.C.resize(K, 3);
  for (int g = 0; g < G; ++g) {
    for (int k : symmetry.groups[g]) {
      out.numerator.row(g) += C_tilde.row(k).cwiseMax(0.0);
      out.denominator(g) += std::max(0.0, 2.0 * W(k) - 1.0);
    }
    out.observed[g] = observed ? (*observed)[g] : out.denominator(g) >= kVisibilityEpsilon;
    if (out.observed[g] && out.denominator(g) > 0.0)
      out.group_colors.row(g) = out.numerator.row(g) / out.denominator(g);
    else if (out.observed[g])
      out.group_colors.row(g).setZero();  // forced flag with no mass: the numerator is zero too
    else
      out.group_colors.row(g) = fallback.transpose();
    for (int k : symmetry.groups[g]) out.C.row(k) = out.group_colors.row(g);
  }
  return out;
}

PropagateGradient propagate_symmetry_backward(const ColoredMesh& mesh, const Eigen::VectorXd& W,
                                              const SymmetryEncoding& symmetry, const Colors& grad_C) {
  const int K = static_cast<int>(mesh.C_tilde.rows());
  PropagateGradient g{Colors::Zero(K, 3), Eigen::VectorXd::Zero(K)};
  for (int gi = 0; gi < symmetry.size(); ++gi) {
    if (!mesh.observed[gi]) continue;
    Eigen::RowVector3d grad_group = Eigen::RowVector3d::Zero();
    for (int k : symmetry.groups[gi]) grad_group += grad_C.row(k);
    const double den = mesh.denominator(gi);
    if (!(den > 0.0)) continue;
    const Eigen::RowVector3d d_num = grad_group / den;
    const double d_den = -grad_group.dot(mesh.numerator.row(gi)) / (den * den);
    for (int k : symmetry.groups[gi]) {
      for (int c = 0; c < 3; ++c)
        if (mesh.C_tilde(k, c) > 0.0) g.C_tilde(k, c) = d_num(c);
      if (2.0 * W(k) - 1.0 > 0.0) g.W(k) = 2.0 * d_den;
    }
  }
  return g;
}

PartPrototypes part_prototypes(const FeatureMap& features, const Points2& v, const Eigen::VectorXd& W,
                               const PartTable& parts, const std::vector<char>* observed) {
  const int K = static_cast<int>(v.rows());
  const int L = parts.size();
  const int d = features.channels();
  if (W.size() != K) throw InvalidArgument("part_prototypes: v and W sizes differ");
  if (observed && static_cast<int>(observed->size()) != L)
    throw InvalidArgument("part_prototypes: observed flags do not match the part count");
  PartPrototypes out;
  out.samples.resize(K, d);
  out.sample_dx.resize(K, d);
  out.sample_dy.resize(K, d);
  Eigen::VectorXd value(d), dx(d), dy(d);
  for (int k = 0; k < K; ++k) {
    sample_bilinear(features, v.row(k).transpose(), value.data(), dx.data(), dy.data());
    out.samples.row(k) = value.transpose();
    out.sample_dx.row(k) = dx.transpose();
    out.sample_dy.row(k) = dy.transpose();
  }
  out.F = Eigen::MatrixXd::Zero(L, d);
  out.weight_sum = Eigen::VectorXd::Zero(L);
  out.observed.assign(L, 0);
  for (int l = 0; l < L; ++l) {
    for (int k : parts.vertices[l]) {
      out.F.row(l) += W(k) * out.samples.row(k);
      out.weight_sum(l) += W(k);
    }
    out.observed[l] = observed ? (*observed)[l] : out.weight_sum(l) >= kVisibilityEpsilon;
    if (out.observed[l] && out.weight_sum(l) > 0.0)
      out.F.row(l) /= out.weight_sum(l);
    else
      out.F.row(l).setZero();
  }
  return out;
}

PrototypeGradient part_prototypes_backward(const PartPrototypes& protos, const Eigen::VectorXd& W,
                                           const PartTable& parts, const Eigen::MatrixXd& grad_F) {
  const int K = static_cast<int>(W.size());
  PrototypeGradient g{Points2::Zero(K, 2), Eigen::VectorXd::Zero(K)};
  for (int l = 0; l < parts.size(); ++l) {
    const double S = protos.weight_sum(l);
    if (!protos.observed[l] || !(S > 0.0)) continue;
    const Eigen::RowVectorXd gF = grad_F.row(l);
    for (int k : parts.vertices[l]) {
      g.W(k) = gF.dot(protos.samples.row(k) - protos.F.row(l)) / S;
      const double w = W(k) / S;
      g.v(k, 0) = w * gF.dot(protos.sample_dx.row(k));
      g.v(k, 1) = w * gF.dot(protos.sample_dy.row(k));
    }
  }
  return g;
}

}  // namespace consensus
