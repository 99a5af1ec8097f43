#pragma once

#include <vector>

#include <Eigen/Core>

#include "consensus_mesh/raster.h"
#include "consensus_mesh/types.h"

namespace consensus {

/// Mean per-joint Euclidean distance after translating both skeletons so
/// joint 0 sits at the origin.
double mpjpe(const Vertices& pred, const Vertices& gt);

struct Similarity {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Vertices aligned;  // scale * R * pred + t
};

/// Least-squares similarity transform taking pred onto gt. Throws
/// DegenerateConfiguration when the joints are (nearly) collinear.
Similarity procrustes_align(const Vertices& pred, const Vertices& gt);

/// Mean per-joint distance after Procrustes alignment.
double pa_mpjpe(const Vertices& pred, const Vertices& gt);

struct SegMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<double> per_class_f1;  // classes 0..num_classes, 0 = background
};

/// Pixel accuracy and F1 per class over labels 0..num_classes. A class absent
/// from both maps scores F1 = 1.
SegMetrics seg_metrics(const LabelMap& pred, const LabelMap& gt, int num_classes);

}  // namespace consensus
