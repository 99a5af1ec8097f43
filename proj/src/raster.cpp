#include "consensus_mesh/raster.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "consensus_mesh/errors.h"
#include "consensus_mesh/parallel.h"

namespace consensus {

namespace {

// Soft-silhouette face terms are faded out smoothly over d / tau in
// [-kCutoff, -kCutoff + kTaper] and skipped below, so coverage stays C1.
constexpr double kCutoff = 12.0;
constexpr double kTaper = 2.0;

double edge_fn(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

// Which of two triangles sharing an edge covers pixel centers exactly on it.
bool owns_edge(const Eigen::Vector2d& d) { return d.y() > 0.0 || (d.y() == 0.0 && d.x() < 0.0); }

Points2 pixel_coords(const Points2& v, ImageSize size) {
  Points2 px(v.rows(), 2);
  const double k = pixels_per_unit(size);
  px.col(0) = v.col(0).array() * k + 0.5 * size.width - 0.5;
  px.col(1) = v.col(1).array() * k + 0.5 * size.height - 0.5;
  return px;
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// -log(1 - sigmoid(x)) with the cutoff taper applied; d_term is its derivative.
double coverage_term(double x, double* d_term) {
  const double u = (x + kCutoff) / kTaper;
  if (u <= 0.0) {
    if (d_term) *d_term = 0.0;
    return 0.0;
  }
  const double sp = softplus(x);
  if (u >= 1.0) {
    if (d_term) *d_term = sigmoid(x);
    return sp;
  }
  const double w = u * u * (3.0 - 2.0 * u);
  if (d_term) *d_term = w * sigmoid(x) + 6.0 * u * (1.0 - u) / kTaper * sp;
  return w * sp;
}

struct PixelBox {
  int x0, x1, y0, y1;  // inclusive
  bool empty() const { return x0 > x1 || y0 > y1; }
};

PixelBox face_box(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c, double margin,
                  ImageSize size, int row_begin, int row_end) {
  auto lo = [&](double v0, double v1, double v2) { return std::min({v0, v1, v2}) - margin; };
  auto hi = [&](double v0, double v1, double v2) { return std::max({v0, v1, v2}) + margin; };
  double xl = std::max(lo(a.x(), b.x(), c.x()), -1.0), xh = std::min(hi(a.x(), b.x(), c.x()), double(size.width));
  double yl = std::max(lo(a.y(), b.y(), c.y()), -1.0), yh = std::min(hi(a.y(), b.y(), c.y()), double(size.height));
  PixelBox box;
  box.x0 = std::max(0, static_cast<int>(std::ceil(xl)));
  box.x1 = std::min(size.width - 1, static_cast<int>(std::floor(xh)));
  box.y0 = std::max(row_begin, static_cast<int>(std::ceil(yl)));
  box.y1 = std::min(row_end - 1, static_cast<int>(std::floor(yh)));
  return box;
}

bool finite_triangle(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  return a.allFinite() && b.allFinite() && c.allFinite();
}

// Cheap rejection for the soft silhouette: a pixel further than `reach` outside
// any edge line is at least that far from the triangle.
struct EdgeLines {
  Eigen::Vector2d n[3];
  double offset[3];
  bool valid = true;

  EdgeLines(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    const Eigen::Vector2d* p[3] = {&a, &b, &c};
    const double sgn = edge_fn(a, b, c) >= 0.0 ? 1.0 : -1.0;
    for (int e = 0; e < 3; ++e) {
      const Eigen::Vector2d d = *p[(e + 1) % 3] - *p[e];
      const double len = d.norm();
      if (!(len > 0.0)) {
        valid = false;
        return;
      }
      n[e] = sgn * Eigen::Vector2d(-d.y(), d.x()) / len;  // points inward
      offset[e] = n[e].dot(*p[e]);
    }
  }

  bool beyond(double x, double y, double reach) const {
    if (!valid) return false;
    for (int e = 0; e < 3; ++e)
      if (n[e].x() * x + n[e].y() * y - offset[e] < -reach) return true;
    return false;
  }
};

}  // namespace

Grid::Grid(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0 || channels < 0) throw InvalidArgument("grid dimensions must be nonnegative");
  data_.assign(static_cast<size_t>(width) * height * channels, fill);
}

Eigen::Vector2d to_pixel(const Eigen::Vector2d& p, ImageSize size) {
  const double k = pixels_per_unit(size);
  return {p.x() * k + 0.5 * size.width - 0.5, p.y() * k + 0.5 * size.height - 0.5};
}

Eigen::Vector2d to_image(const Eigen::Vector2d& px, ImageSize size) {
  const double k = pixels_per_unit(size);
  return {(px.x() + 0.5 - 0.5 * size.width) / k, (px.y() + 0.5 - 0.5 * size.height) / k};
}

void sample_bilinear(const Grid& map, const Eigen::Vector2d& p, double* value, double* d_dx, double* d_dy) {
  const int W = map.width(), H = map.height(), C = map.channels();
  const double k = pixels_per_unit(map.size());
  const double px = p.x() * k + 0.5 * W - 0.5;
  const double py = p.y() * k + 0.5 * H - 0.5;
  if (!std::isfinite(px) || !std::isfinite(py) || W == 0 || H == 0) {
    for (int c = 0; c < C; ++c) {
      value[c] = std::numeric_limits<double>::quiet_NaN();
      if (d_dx) d_dx[c] = 0.0;
      if (d_dy) d_dy[c] = 0.0;
    }
    return;
  }
  const double bx = std::floor(std::clamp(px, -1.0, double(W)));
  const double by = std::floor(std::clamp(py, -1.0, double(H)));
  const double fx = std::clamp(px, -1.0, double(W)) - bx;
  const double fy = std::clamp(py, -1.0, double(H)) - by;
  const int x0 = std::clamp(static_cast<int>(bx), 0, W - 1), x1 = std::clamp(static_cast<int>(bx) + 1, 0, W - 1);
  const int y0 = std::clamp(static_cast<int>(by), 0, H - 1), y1 = std::clamp(static_cast<int>(by) + 1, 0, H - 1);
  for (int c = 0; c < C; ++c) {
    const double v00 = map.at(x0, y0, c), v10 = map.at(x1, y0, c);
    const double v01 = map.at(x0, y1, c), v11 = map.at(x1, y1, c);
    value[c] = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);
    if (d_dx) d_dx[c] = k * ((1.0 - fy) * (v10 - v00) + fy * (v11 - v01));
    if (d_dy) d_dy[c] = k * ((1.0 - fx) * (v01 - v00) + fx * (v11 - v10));
  }
}

Eigen::VectorXd sample_bilinear(const Grid& map, const Eigen::Vector2d& p,
                                Eigen::Matrix<double, Eigen::Dynamic, 2>* gradient) {
  Eigen::VectorXd value(map.channels());
  if (!gradient) {
    sample_bilinear(map, p, value.data(), nullptr, nullptr);
    return value;
  }
  Eigen::VectorXd gx(map.channels()), gy(map.channels());
  sample_bilinear(map, p, value.data(), gx.data(), gy.data());
  gradient->resize(map.channels(), 2);
  gradient->col(0) = gx;
  gradient->col(1) = gy;
  return value;
}

Fragments rasterize(const Points2& v, const Eigen::VectorXd& Z, const Faces& faces, ImageSize size) {
  const int W = size.width, H = size.height;
  Fragments fr;
  fr.size = size;
  const size_t n = static_cast<size_t>(W) * H;
  fr.face.assign(n, -1);
  fr.bary.assign(n, Eigen::Vector3d::Zero());
  fr.depth.assign(n, std::numeric_limits<double>::infinity());
  if (n == 0 || faces.rows() == 0) return fr;
  const Points2 px = pixel_coords(v, size);

  parallel_for(H, [&](int row_begin, int row_end) {
    for (int f = 0; f < faces.rows(); ++f) {
      const int i0 = faces(f, 0), i1 = faces(f, 1), i2 = faces(f, 2);
      const Eigen::Vector2d p0 = px.row(i0), p1 = px.row(i1), p2 = px.row(i2);
      if (!finite_triangle(p0, p1, p2)) continue;
      const double area = edge_fn(p0, p1, p2);
      if (area == 0.0) continue;
      const double sgn = area > 0.0 ? 1.0 : -1.0;
      const bool own0 = owns_edge(sgn * (p2 - p1)), own1 = owns_edge(sgn * (p0 - p2)), own2 = owns_edge(sgn * (p1 - p0));
      const PixelBox box = face_box(p0, p1, p2, 0.0, size, row_begin, row_end);
      if (box.empty()) continue;
      for (int y = box.y0; y <= box.y1; ++y)
        for (int x = box.x0; x <= box.x1; ++x) {
          const Eigen::Vector2d p(x, y);
          const double w0 = sgn * edge_fn(p1, p2, p), w1 = sgn * edge_fn(p2, p0, p), w2 = sgn * edge_fn(p0, p1, p);
          if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
          if ((w0 == 0.0 && !own0) || (w1 == 0.0 && !own1) || (w2 == 0.0 && !own2)) continue;
          const double inv = 1.0 / (sgn * area);
          const Eigen::Vector3d b(w0 * inv, w1 * inv, w2 * inv);
          const double z = b(0) * Z(i0) + b(1) * Z(i1) + b(2) * Z(i2);
          const size_t idx = static_cast<size_t>(y) * W + x;
          if (z < fr.depth[idx]) {
            fr.depth[idx] = z;
            fr.face[idx] = f;
            fr.bary[idx] = b;
          }
        }
    }
  });
  return fr;
}

double far_depth(const Points2& v, const Eigen::VectorXd& Z) {
  if (v.rows() == 0) return 1.0;
  Eigen::Vector3d lo(v.col(0).minCoeff(), v.col(1).minCoeff(), Z.minCoeff());
  Eigen::Vector3d hi(v.col(0).maxCoeff(), v.col(1).maxCoeff(), Z.maxCoeff());
  return Z.maxCoeff() + 10.0 * (hi - lo).norm();
}

DepthMap rasterize_depth(const Points2& v, const Eigen::VectorXd& Z, const Faces& faces, ImageSize size) {
  DepthMap map(size.width, size.height, far_depth(v, Z));
  const Fragments fr = rasterize(v, Z, faces, size);
  for (size_t i = 0; i < fr.face.size(); ++i)
    if (fr.face[i] >= 0) map.data()[i] = fr.depth[i];
  return map;
}

ColoredRender render_colored(const Points2& v, const Eigen::VectorXd& Z, const Faces& faces, const Colors& colors,
                             ImageSize size) {
  ColoredRender out{ImageRGB(size.width, size.height), Mask(size.width, size.height)};
  const Fragments fr = rasterize(v, Z, faces, size);
  for (size_t i = 0; i < fr.face.size(); ++i) {
    const int f = fr.face[i];
    if (f < 0) continue;
    Eigen::RowVector3d c = Eigen::RowVector3d::Zero();
    for (int j = 0; j < 3; ++j) c += fr.bary[i](j) * colors.row(faces(f, j));
    for (int ch = 0; ch < 3; ++ch) out.image.data()[3 * i + ch] = c(ch);
    out.mask.data()[i] = 1.0;
  }
  return out;
}

std::vector<int> face_part_labels(const Faces& faces, const PartTable& parts) {
  std::vector<int> labels(faces.rows());
  for (int f = 0; f < faces.rows(); ++f) {
    int p[3];
    for (int j = 0; j < 3; ++j) p[j] = parts.part_of.at(faces(f, j));
    int label;
    if (p[0] == p[1] || p[0] == p[2])
      label = p[0];
    else if (p[1] == p[2])
      label = p[1];
    else
      label = std::min({p[0], p[1], p[2]});
    labels[f] = label + 1;
  }
  return labels;
}

LabelMap render_part_labels(const Points2& v, const Eigen::VectorXd& Z, const Faces& faces, const PartTable& parts,
                            ImageSize size) {
  const std::vector<int> face_labels = face_part_labels(faces, parts);
  const Fragments fr = rasterize(v, Z, faces, size);
  LabelMap out{size.width, size.height, std::vector<int>(fr.face.size(), 0)};
  for (size_t i = 0; i < fr.face.size(); ++i)
    if (fr.face[i] >= 0) out.labels[i] = face_labels[fr.face[i]];
  return out;
}

double signed_triangle_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                const Eigen::Vector2d& c, Eigen::Matrix<double, 3, 2>* gradient) {
  const Eigen::Vector2d* corner[3] = {&a, &b, &c};
  double ef[3];
  for (int e = 0; e < 3; ++e) ef[e] = edge_fn(*corner[e], *corner[(e + 1) % 3], p);
  const bool inside = (ef[0] >= 0.0 && ef[1] >= 0.0 && ef[2] >= 0.0) || (ef[0] <= 0.0 && ef[1] <= 0.0 && ef[2] <= 0.0);
  double best2 = std::numeric_limits<double>::infinity();
  int best_edge = 0;
  double best_t = 0.0;
  for (int e = 0; e < 3; ++e) {
    const Eigen::Vector2d& s0 = *corner[e];
    const Eigen::Vector2d d = *corner[(e + 1) % 3] - s0;
    const double len2 = d.squaredNorm();
    double dist2, t;
    if (inside && len2 > 0.0) {
      // The nearest edge line of an interior point has its foot on the segment.
      dist2 = ef[e] * ef[e] / len2;
      t = (p - s0).dot(d) / len2;
    } else {
      t = len2 > 0.0 ? std::clamp((p - s0).dot(d) / len2, 0.0, 1.0) : 0.0;
      dist2 = (p - s0 - t * d).squaredNorm();
    }
    if (dist2 < best2) best2 = dist2, best_edge = e, best_t = t;
  }
  const double best = std::sqrt(best2);
  const double sign = inside ? 1.0 : -1.0;
  if (gradient) {
    gradient->setZero();
    if (best > 0.0) {
      const Eigen::Vector2d& s0 = *corner[best_edge];
      const Eigen::Vector2d d = *corner[(best_edge + 1) % 3] - s0;
      const Eigen::Vector2d u = (p - s0 - best_t * d) / best;
      gradient->row(best_edge) = -sign * (1.0 - best_t) * u.transpose();
      gradient->row((best_edge + 1) % 3) = -sign * best_t * u.transpose();
    }
  }
  return sign * best;
}

Mask soft_silhouette(const Points2& v, const Faces& faces, double tau, ImageSize size) {
  if (!(tau > 0.0)) throw InvalidArgument("soft_silhouette: tau must be positive");
  const int W = size.width, H = size.height;
  std::vector<double> acc(static_cast<size_t>(W) * H, 0.0);
  const Points2 px = pixel_coords(v, size);
  const double margin = kCutoff * tau;
  parallel_for(H, [&](int row_begin, int row_end) {
    for (int f = 0; f < faces.rows(); ++f) {
      const Eigen::Vector2d a = px.row(faces(f, 0)), b = px.row(faces(f, 1)), c = px.row(faces(f, 2));
      if (!finite_triangle(a, b, c)) continue;
      const PixelBox box = face_box(a, b, c, margin, size, row_begin, row_end);
      if (box.empty()) continue;
      const EdgeLines lines(a, b, c);
      for (int y = box.y0; y <= box.y1; ++y)
        for (int x = box.x0; x <= box.x1; ++x) {
          if (lines.beyond(x, y, margin)) continue;
          const double x_f = signed_triangle_distance(Eigen::Vector2d(x, y), a, b, c) / tau;
          acc[static_cast<size_t>(y) * W + x] += coverage_term(x_f, nullptr);
        }
    }
  });
  Mask out(W, H);
  for (size_t i = 0; i < acc.size(); ++i) out.data()[i] = -std::expm1(-acc[i]);
  return out;
}

Points2 soft_silhouette_backward(const Points2& v, const Faces& faces, double tau, const Mask& forward,
                                 const Mask& grad_mask) {
  if (!(tau > 0.0)) throw InvalidArgument("soft_silhouette: tau must be positive");
  if (!(forward.size() == grad_mask.size())) throw ResolutionMismatch("soft_silhouette_backward: mask sizes differ");
  const ImageSize size = forward.size();
  const int W = size.width;
  const Points2 px = pixel_coords(v, size);
  const double margin = kCutoff * tau;
  // Per-face gradient rows; faces are disjoint work items so no locking is needed.
  std::vector<Eigen::Matrix<double, 3, 2>> face_grad(faces.rows(), Eigen::Matrix<double, 3, 2>::Zero());
  parallel_for(static_cast<int>(faces.rows()), [&](int f_begin, int f_end) {
    for (int f = f_begin; f < f_end; ++f) {
      const Eigen::Vector2d a = px.row(faces(f, 0)), b = px.row(faces(f, 1)), c = px.row(faces(f, 2));
      if (!finite_triangle(a, b, c)) continue;
      const PixelBox box = face_box(a, b, c, margin, size, 0, size.height);
      if (box.empty()) continue;
      Eigen::Matrix<double, 3, 2> g = Eigen::Matrix<double, 3, 2>::Zero();
      Eigen::Matrix<double, 3, 2> dd;
      const EdgeLines lines(a, b, c);
      for (int y = box.y0; y <= box.y1; ++y)
        for (int x = box.x0; x <= box.x1; ++x) {
          const size_t idx = static_cast<size_t>(y) * W + x;
          const double gA = grad_mask.data()[idx];
          if (gA == 0.0 || lines.beyond(x, y, margin)) continue;
          const double x_f = signed_triangle_distance(Eigen::Vector2d(x, y), a, b, c, &dd) / tau;
          double d_term;
          coverage_term(x_f, &d_term);
          if (d_term == 0.0) continue;
          const double dA = (1.0 - forward.data()[idx]) * d_term / tau;
          g += gA * dA * dd;
        }
      face_grad[f] = g;
    }
  });
  Points2 grad = Points2::Zero(v.rows(), 2);
  const double k = pixels_per_unit(size);
  for (int f = 0; f < faces.rows(); ++f)
    for (int j = 0; j < 3; ++j) grad.row(faces(f, j)) += k * face_grad[f].row(j);
  return grad;
}

}  // namespace consensus
