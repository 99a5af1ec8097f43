#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "consensus_mesh/types.h"

namespace consensus {

/// Reflectional symmetry groups. Each group holds 4 vertices (left-right x
/// front-back mirrors) or 2 (left-right only, used on the head).
struct SymmetryEncoding {
  std::vector<std::vector<int>> groups;
  std::vector<int> group_of;  // vertex -> group id

  int size() const { return static_cast<int>(groups.size()); }
  /// G x K multi-hot matrix.
  Eigen::MatrixXd dense(int num_vertices) const;
  void rebuild_index(int num_vertices);
};

struct PartTable {
  std::vector<std::string> names;
  std::vector<std::vector<int>> vertices;
  std::vector<int> part_of;  // vertex -> part id (0-based)

  int size() const { return static_cast<int>(vertices.size()); }
  int find(const std::string& name) const;  // -1 if absent
  void rebuild_index(int num_vertices);
};

/// Parametric body: shape blendshapes, a kinematic tree with J articulated
/// joints below a root node, and linear blend skinning. Node 0 is the root;
/// parents[j] < j for every other node.
struct BodyModel {
  Vertices template_vertices;        // K x 3 rest pose
  Eigen::MatrixXd shape_basis;       // 3K x 10, row 3k+c is coordinate c of vertex k
  Faces faces;                       // F x 3, outward winding
  std::vector<int> parents;          // J+1 entries, parents[0] = -1
  std::vector<std::string> joint_names;
  Eigen::MatrixXd joint_regressor_rest;  // (J+1) x K
  Eigen::MatrixXd skin_weights;          // K x (J+1)
  Eigen::MatrixXd pose_regressor;        // J x K, evaluation skeleton
  SymmetryEncoding symmetry;
  PartTable parts;

  int num_vertices() const { return static_cast<int>(template_vertices.rows()); }
  int num_joints() const { return static_cast<int>(parents.size()) - 1; }
  int pose_dim() const { return 3 * num_joints(); }
  int num_faces() const { return static_cast<int>(faces.rows()); }
};

/// Throws FormatError describing the first violated invariant.
void validate(const BodyModel& model);

/// Shaped rest vertices: template + shape_basis * beta.
Vertices shaped_template(const BodyModel& model, const ShapeVector& beta);

struct SkinResult {
  Vertices vertices;                     // K x 3
  Vertices rest_joints;                  // (J+1) x 3, shaped rest skeleton
  std::vector<Eigen::Isometry3d> joint_transforms;  // world frame of each node
  // Filled only when requested. Row 3k+c is coordinate c of vertex k.
  Eigen::MatrixXd d_theta;  // 3K x 3J
  Eigen::MatrixXd d_beta;   // 3K x 10
  Eigen::MatrixXd d_root;   // 3K x 3
};

/// Linear blend skinning. theta holds one axis-angle triple per articulated
/// joint (nodes 1..J); root_rotation rotates the whole body about the root
/// joint and defaults to none.
SkinResult skin(const BodyModel& model, const ShapeVector& beta, const Eigen::VectorXd& theta,
                const Eigen::Vector3d& root_rotation = Eigen::Vector3d::Zero(),
                bool with_jacobians = false);

/// Rest-pose body height (extent along y) for the given shape.
double body_height(const BodyModel& model, const ShapeVector& beta = ShapeVector::Zero());

/// Y = W_p V, the J x 3 evaluation skeleton.
Vertices regress_joints(const BodyModel& model, const Vertices& V);

/// Unit vertex normals: normalized mean of the unit normals of incident faces.
/// Throws DegenerateFace for faces with area below 1e-12.
Vertices vertex_normals(const BodyModel& model, const Vertices& V);
Vertices vertex_normals(const Faces& faces, const Vertices& V);

/// Vector-Jacobian product of vertex_normals: maps dL/dN to dL/dV.
Vertices vertex_normals_backward(const Faces& faces, const Vertices& V, const Vertices& grad_normals);

}  // namespace consensus
