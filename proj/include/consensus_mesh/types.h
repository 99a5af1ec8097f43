#pragma once

#include <Eigen/Core>

namespace consensus {

inline constexpr int kShapeDim = 10;
inline constexpr int kLatentDim = 32;

// Per-vertex rows. Colors use the same K x 3 layout as vertex positions.
using Vertices = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;
using Colors = Vertices;
using Faces = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

using ShapeVector = Eigen::Matrix<double, kShapeDim, 1>;
using LatentVector = Eigen::Matrix<double, kLatentDim, 1>;

}  // namespace consensus
