#include "consensus_mesh/body_model.h"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "consensus_mesh/errors.h"
#include "consensus_mesh/rotation.h"

namespace consensus {

namespace {

constexpr double kMinFaceArea = 1e-12;

[[noreturn]] void fail(const std::string& what) { throw FormatError("invalid body model: " + what); }

}  // namespace

Eigen::MatrixXd SymmetryEncoding::dense(int num_vertices) const {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(size(), num_vertices);
  for (int g = 0; g < size(); ++g)
    for (int k : groups[g]) S(g, k) = 1.0;
  return S;
}

void SymmetryEncoding::rebuild_index(int num_vertices) {
  group_of.assign(num_vertices, -1);
  for (int g = 0; g < size(); ++g)
    for (int k : groups[g])
      if (k >= 0 && k < num_vertices) group_of[k] = g;
}

int PartTable::find(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(names.size()); ++i)
    if (names[i] == name) return i;
  return -1;
}

void PartTable::rebuild_index(int num_vertices) {
  part_of.assign(num_vertices, -1);
  for (int l = 0; l < size(); ++l)
    for (int k : vertices[l])
      if (k >= 0 && k < num_vertices) part_of[k] = l;
}

void validate(const BodyModel& model) {
  const int K = model.num_vertices();
  const int J = model.num_joints();
  if (K == 0) fail("no vertices");
  if (J < 1) fail("kinematic tree needs at least one articulated joint");
  if (model.shape_basis.rows() != 3 * K || model.shape_basis.cols() != kShapeDim)
    fail("shape_basis must be 3K x 10");
  if (!model.template_vertices.allFinite() || !model.shape_basis.allFinite()) fail("non-finite geometry");
  if (model.parents[0] != -1) fail("parents[0] must be -1");
  for (int j = 1; j <= J; ++j)
    if (model.parents[j] < 0 || model.parents[j] >= j) fail("parents must precede children");
  if (!model.joint_names.empty() && static_cast<int>(model.joint_names.size()) != J + 1)
    fail("joint_names must have J+1 entries");
  if (model.joint_regressor_rest.rows() != J + 1 || model.joint_regressor_rest.cols() != K)
    fail("joint_regressor_rest must be (J+1) x K");
  if (model.pose_regressor.rows() != J || model.pose_regressor.cols() != K)
    fail("pose_regressor must be J x K");
  if (model.skin_weights.rows() != K || model.skin_weights.cols() != J + 1)
    fail("skin_weights must be K x (J+1)");
  for (int k = 0; k < K; ++k) {
    if ((model.skin_weights.row(k).array() < 0.0).any()) fail("negative skin weight");
    if (std::abs(model.skin_weights.row(k).sum() - 1.0) > 1e-6) {
      std::ostringstream os;
      os << "skin weights of vertex " << k << " do not sum to 1";
      fail(os.str());
    }
  }
  std::vector<int> face_count(K, 0);
  for (int f = 0; f < model.num_faces(); ++f)
    for (int c = 0; c < 3; ++c) {
      int idx = model.faces(f, c);
      if (idx < 0 || idx >= K) fail("face index out of range");
      ++face_count[idx];
    }
  for (int k = 0; k < K; ++k)
    if (face_count[k] == 0) fail("vertex " + std::to_string(k) + " belongs to no face");

  std::vector<int> seen(K, 0);
  for (const auto& g : model.symmetry.groups) {
    if (g.size() != 2 && g.size() != 4) fail("symmetry groups must have 2 or 4 members");
    for (int k : g) {
      if (k < 0 || k >= K) fail("symmetry index out of range");
      ++seen[k];
    }
  }
  for (int k = 0; k < K; ++k)
    if (seen[k] != 1) fail("symmetry groups must partition the vertices");

  std::fill(seen.begin(), seen.end(), 0);
  if (!model.parts.names.empty() && model.parts.names.size() != model.parts.vertices.size())
    fail("part names and part vertex lists differ in length");
  for (const auto& part : model.parts.vertices)
    for (int k : part) {
      if (k < 0 || k >= K) fail("part index out of range");
      ++seen[k];
    }
  for (int k = 0; k < K; ++k)
    if (seen[k] != 1) fail("parts must partition the vertices");
}

Vertices shaped_template(const BodyModel& model, const ShapeVector& beta) {
  const int K = model.num_vertices();
  Eigen::VectorXd offsets = model.shape_basis * beta;
  Vertices T = model.template_vertices;
  T += Eigen::Map<const Vertices>(offsets.data(), K, 3);
  return T;
}

SkinResult skin(const BodyModel& model, const ShapeVector& beta, const Eigen::VectorXd& theta,
                const Eigen::Vector3d& root_rotation, bool with_jacobians) {
  const int K = model.num_vertices();
  const int J = model.num_joints();
  const int nodes = J + 1;
  if (theta.size() != 3 * J) throw InvalidArgument("theta must have 3J entries");

  SkinResult out;
  Vertices T = shaped_template(model, beta);
  out.rest_joints = model.joint_regressor_rest * T;
  const Vertices& rest = out.rest_joints;

  std::vector<RotationJacobian> local(nodes);
  local[0] = rodrigues_with_jacobian(root_rotation);
  for (int j = 1; j < nodes; ++j) local[j] = rodrigues_with_jacobian(theta.segment<3>(3 * (j - 1)));

  std::vector<Eigen::Matrix3d> Rg(nodes);
  std::vector<Eigen::Vector3d> P(nodes);
  Rg[0] = local[0].R;
  P[0] = rest.row(0).transpose();
  for (int j = 1; j < nodes; ++j) {
    int p = model.parents[j];
    Rg[j] = Rg[p] * local[j].R;
    P[j] = P[p] + Rg[p] * (rest.row(j) - rest.row(p)).transpose();
  }
  out.joint_transforms.resize(nodes);
  for (int j = 0; j < nodes; ++j) {
    Eigen::Isometry3d G = Eigen::Isometry3d::Identity();
    G.linear() = Rg[j];
    G.translation() = P[j];
    out.joint_transforms[j] = G;
  }

  // Per-node posed copy of each vertex, weighted: X[k*nodes + j] = w_kj A_j(T_k).
  std::vector<Eigen::Vector3d> X(static_cast<size_t>(K) * nodes, Eigen::Vector3d::Zero());
  out.vertices.setZero(K, 3);
  for (int k = 0; k < K; ++k) {
    Eigen::Vector3d t = T.row(k).transpose();
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    for (int j = 0; j < nodes; ++j) {
      double w = model.skin_weights(k, j);
      if (w == 0.0) continue;
      Eigen::Vector3d x = w * (Rg[j] * (t - rest.row(j).transpose()) + P[j]);
      X[static_cast<size_t>(k) * nodes + j] = x;
      acc += x;
    }
    out.vertices.row(k) = acc.transpose();
  }
  if (!with_jacobians) return out;

  // Pose: dV_k/dw_mi = D_mi * sum_{j in subtree(m)} w_kj (A_j T_k - P_m),
  // with D_mi = Rg_parent * dR_mi * R_m^T * Rg_parent^T.
  Eigen::MatrixXd Wsub = model.skin_weights;
  std::vector<Eigen::Vector3d>& S = X;
  for (int j = nodes - 1; j >= 1; --j) {
    int p = model.parents[j];
    Wsub.col(p) += Wsub.col(j);
    for (int k = 0; k < K; ++k) S[static_cast<size_t>(k) * nodes + p] += S[static_cast<size_t>(k) * nodes + j];
  }
  out.d_theta.setZero(3 * K, 3 * J);
  out.d_root.setZero(3 * K, 3);
  for (int m = 0; m < nodes; ++m) {
    Eigen::Matrix3d Rp = m == 0 ? Eigen::Matrix3d::Identity() : Rg[model.parents[m]];
    std::array<Eigen::Matrix3d, 3> D;
    for (int i = 0; i < 3; ++i) D[i] = Rp * local[m].dR[i] * local[m].R.transpose() * Rp.transpose();
    Eigen::MatrixXd& target = m == 0 ? out.d_root : out.d_theta;
    int col0 = m == 0 ? 0 : 3 * (m - 1);
    for (int k = 0; k < K; ++k) {
      double ws = Wsub(k, m);
      if (ws == 0.0) continue;
      Eigen::Vector3d u = S[static_cast<size_t>(k) * nodes + m] - ws * P[m];
      for (int i = 0; i < 3; ++i) target.block<3, 1>(3 * k, col0 + i) = D[i] * u;
    }
  }

  // Shape: dV_k/db = M_k B_kb + sum_j w_kj (dP_jb - Rg_j dJ_jb), M_k = sum_j w_kj Rg_j.
  out.d_beta.setZero(3 * K, kShapeDim);
  std::vector<Eigen::Matrix<double, 3, kShapeDim>> c(nodes);
  for (int b = 0; b < kShapeDim; ++b) {
    Eigen::Map<const Vertices> Bb(model.shape_basis.col(b).data(), K, 3);
    Vertices dJ = model.joint_regressor_rest * Vertices(Bb);
    std::vector<Eigen::Vector3d> dP(nodes);
    dP[0] = dJ.row(0).transpose();
    for (int j = 1; j < nodes; ++j) {
      int p = model.parents[j];
      dP[j] = dP[p] + Rg[p] * (dJ.row(j) - dJ.row(p)).transpose();
    }
    for (int j = 0; j < nodes; ++j) c[j].col(b) = dP[j] - Rg[j] * dJ.row(j).transpose();
  }
  for (int k = 0; k < K; ++k) {
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    Eigen::Matrix<double, 3, kShapeDim> acc = Eigen::Matrix<double, 3, kShapeDim>::Zero();
    for (int j = 0; j < nodes; ++j) {
      double w = model.skin_weights(k, j);
      if (w == 0.0) continue;
      M += w * Rg[j];
      acc += w * c[j];
    }
    Eigen::Matrix<double, 3, kShapeDim> Bk = model.shape_basis.block<3, kShapeDim>(3 * k, 0);
    out.d_beta.block<3, kShapeDim>(3 * k, 0) = M * Bk + acc;
  }
  return out;
}

Vertices regress_joints(const BodyModel& model, const Vertices& V) { return model.pose_regressor * V; }

Vertices vertex_normals(const BodyModel& model, const Vertices& V) { return vertex_normals(model.faces, V); }

Vertices vertex_normals(const Faces& faces, const Vertices& V) {
  Vertices sums = Vertices::Zero(V.rows(), 3);
  for (int f = 0; f < faces.rows(); ++f) {
    Eigen::Vector3d p0 = V.row(faces(f, 0)), p1 = V.row(faces(f, 1)), p2 = V.row(faces(f, 2));
    Eigen::Vector3d c = (p1 - p0).cross(p2 - p0);
    double len = c.norm();
    if (0.5 * len < kMinFaceArea) throw DegenerateFace("face " + std::to_string(f) + " has near-zero area");
    Eigen::RowVector3d n = (c / len).transpose();
    for (int i = 0; i < 3; ++i) sums.row(faces(f, i)) += n;
  }
  for (int k = 0; k < sums.rows(); ++k) {
    double len = sums.row(k).norm();
    if (len > 0.0) sums.row(k) /= len;
  }
  return sums;
}

Vertices vertex_normals_backward(const Faces& faces, const Vertices& V, const Vertices& grad_normals) {
  const int K = static_cast<int>(V.rows());
  const int F = static_cast<int>(faces.rows());
  std::vector<Eigen::Vector3d> face_n(F);
  std::vector<double> face_len(F);
  Vertices sums = Vertices::Zero(K, 3);
  for (int f = 0; f < F; ++f) {
    Eigen::Vector3d p0 = V.row(faces(f, 0)), p1 = V.row(faces(f, 1)), p2 = V.row(faces(f, 2));
    Eigen::Vector3d c = (p1 - p0).cross(p2 - p0);
    face_len[f] = c.norm();
    if (0.5 * face_len[f] < kMinFaceArea) throw DegenerateFace("face " + std::to_string(f) + " has near-zero area");
    face_n[f] = c / face_len[f];
    for (int i = 0; i < 3; ++i) sums.row(faces(f, i)) += face_n[f].transpose();
  }
  // n_k = s_k / |s_k|
  Vertices grad_sum = Vertices::Zero(K, 3);
  for (int k = 0; k < K; ++k) {
    Eigen::Vector3d s = sums.row(k).transpose();
    double len = s.norm();
    if (len == 0.0) continue;
    Eigen::Vector3d m = s / len;
    Eigen::Vector3d g = grad_normals.row(k).transpose();
    grad_sum.row(k) = ((g - m * m.dot(g)) / len).transpose();
  }
  Vertices grad_V = Vertices::Zero(K, 3);
  for (int f = 0; f < F; ++f) {
    Eigen::Vector3d gn = Eigen::Vector3d::Zero();
    for (int i = 0; i < 3; ++i) gn += grad_sum.row(faces(f, i)).transpose();
    const Eigen::Vector3d& n = face_n[f];
    Eigen::Vector3d gc = (gn - n * n.dot(gn)) / face_len[f];
    Eigen::Vector3d p0 = V.row(faces(f, 0)), p1 = V.row(faces(f, 1)), p2 = V.row(faces(f, 2));
    Eigen::Vector3d a = p1 - p0, b = p2 - p0;
    Eigen::Vector3d ga = b.cross(gc);
    Eigen::Vector3d gb = gc.cross(a);
    grad_V.row(faces(f, 1)) += ga.transpose();
    grad_V.row(faces(f, 2)) += gb.transpose();
    grad_V.row(faces(f, 0)) -= (ga + gb).transpose();
  }
  return grad_V;
}

double body_height(const BodyModel& model, const ShapeVector& beta) {
  const Vertices V = shaped_template(model, beta);
  return V.col(1).maxCoeff() - V.col(1).minCoeff();
}

}  // namespace consensus
