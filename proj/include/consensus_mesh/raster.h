#pragma once

#include <vector>

#include <Eigen/Core>

#include "consensus_mesh/body_model.h"
#include "consensus_mesh/types.h"

namespace consensus {

struct ImageSize {
  int width = 0;
  int height = 0;
  bool operator==(const ImageSize&) const = default;
};

/// Dense H x W x C raster of doubles, row-major with interleaved channels.
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, int channels, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  ImageSize size() const { return {width_, height_}; }
  bool empty() const { return data_.empty(); }

  double& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  double at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  size_t index(int x, int y, int c) const {
    return (static_cast<size_t>(y) * width_ + x) * channels_ + c;
  }
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// RGB in [0,1] on file boundaries; unrestricted in memory.
struct ImageRGB : Grid {
  ImageRGB() = default;
  ImageRGB(int width, int height, double fill = 0.0) : Grid(width, height, 3, fill) {}
};

struct Mask : Grid {
  Mask() = default;
  Mask(int width, int height, double fill = 0.0) : Grid(width, height, 1, fill) {}
};

struct FeatureMap : Grid {
  FeatureMap() = default;
  FeatureMap(int width, int height, int depth, double fill = 0.0) : Grid(width, height, depth, fill) {}
};

/// Per-pixel nearest depth. Uncovered pixels hold z_far.
struct DepthMap : Grid {
  DepthMap() = default;
  DepthMap(int width, int height, double z_far) : Grid(width, height, 1, z_far), z_far(z_far) {}
  double z_far = 0.0;
};

struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<int> labels;
  int& at(int x, int y) { return labels[static_cast<size_t>(y) * width + x]; }
  int at(int x, int y) const { return labels[static_cast<size_t>(y) * width + x]; }
};

// Image coordinates put the origin at the image center with x right and y
// down; one unit is half the image height. Pixel (i, j) has its center at
// integer pixel coordinates (i, j).
Eigen::Vector2d to_pixel(const Eigen::Vector2d& p, ImageSize size);
Eigen::Vector2d to_image(const Eigen::Vector2d& px, ImageSize size);
inline double pixels_per_unit(ImageSize size) { return 0.5 * size.height; }

/// Bilinear lookup with clamp-to-edge addressing at image coordinate p.
/// Writes channels() values; gradients are w.r.t. p and may be null.
void sample_bilinear(const Grid& map, const Eigen::Vector2d& p, double* value, double* d_dx, double* d_dy);

/// Convenience form: value per channel, optional channels x 2 gradient.
Eigen::VectorXd sample_bilinear(const Grid& map, const Eigen::Vector2d& p,
                                Eigen::Matrix<double, Eigen::Dynamic, 2>* gradient = nullptr);

/// z-buffer output: covering face (-1 = none), barycentrics, depth.
struct Fragments {
  ImageSize size;
  std::vector<int> face;
  std::vector<Eigen::Vector3d> bary;
  std::vector<double> depth;
};

/// Hard rasterization of projected triangles. A pixel is covered when its
/// center lies inside the triangle, with a top-left rule on shared edges.
/// Nearest depth wins; equal depths keep the lowest face index.
Fragments rasterize(const Points2& v, const Eigen::VectorXd& Z, const Faces& faces, ImageSize size);

/// Background sentinel: max depth + 10 x diagonal of the (v, Z) bounding box.
double far_depth(const Points2& v, const Eigen::VectorXd& Z);

DepthMap rasterize_depth(const Points2& v, const Eigen::VectorXd& Z, const Faces& faces, ImageSize size);

struct ColoredRender {
  ImageRGB image;
  Mask mask;
};

/// Gouraud-shaded vertex colors over a black background.
ColoredRender render_colored(const Points2& v, const Eigen::VectorXd& Z, const Faces& faces, const Colors& colors,
                             ImageSize size);

/// Face label = majority part of its vertices (ties to the lowest part), as
/// 1-based part ids. Background pixels are 0.
std::vector<int> face_part_labels(const Faces& faces, const PartTable& parts);
LabelMap render_part_labels(const Points2& v, const Eigen::VectorXd& Z, const Faces& faces, const PartTable& parts,
                            ImageSize size);

/// Soft coverage A(u) = 1 - prod_f (1 - sigmoid(d_f(u) / tau)), d_f the signed
/// pixel distance to triangle f (positive inside) and tau in pixels. A face's
/// term fades out smoothly between 10 tau and 12 tau outside it (the dropped
/// coverage is below 5e-5 per face).
Mask soft_silhouette(const Points2& v, const Faces& faces, double tau, ImageSize size);

/// dL/dv given the forward mask and dL/dA.
Points2 soft_silhouette_backward(const Points2& v, const Faces& faces, double tau, const Mask& forward,
                                 const Mask& grad_mask);

/// Signed distance (pixels) from point p to triangle (a, b, c), positive
/// inside, with its gradient w.r.t. the three corners.
double signed_triangle_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                const Eigen::Vector2d& c, Eigen::Matrix<double, 3, 2>* gradient = nullptr);

}  // namespace consensus
