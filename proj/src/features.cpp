#include <algorithm>
#include <cmath>
#include <vector>

#include "consensus_mesh/color_recovery.h"

namespace consensus {

namespace {

constexpr double kBlurSigma = 2.0;

// Separable Gaussian blur of one channel with clamp-to-edge addressing.
std::vector<double> blur(const std::vector<double>& src, int W, int H) {
  const int radius = static_cast<int>(std::ceil(3.0 * kBlurSigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) total += kernel[i + radius] = std::exp(-0.5 * i * i / (kBlurSigma * kBlurSigma));
  for (double& k : kernel) k /= total;
  std::vector<double> tmp(src.size()), out(src.size());
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * src[y * W + std::clamp(x + i, 0, W - 1)];
      tmp[y * W + x] = acc;
    }
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp[std::clamp(y + i, 0, H - 1) * W + x];
      out[y * W + x] = acc;
    }
  return out;
}

}  // namespace

FeatureMap builtin_features(const ImageRGB& image) {
  const int W = std::max(1, image.width() / 2);
  const int H = std::max(1, image.height() / 2);
  FeatureMap out(W, H, 9);
  if (image.empty()) return out;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> half(static_cast<size_t>(W) * H);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double acc = 0.0;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx)
            acc += image.at(std::min(2 * x + dx, image.width() - 1), std::min(2 * y + dy, image.height() - 1), c);
        half[y * W + x] = 0.25 * acc;
      }
    const std::vector<double> blurred = blur(half, W, H);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        auto at = [&](int xx, int yy) { return half[std::clamp(yy, 0, H - 1) * W + std::clamp(xx, 0, W - 1)]; };
        const double gx = 0.5 * (at(x + 1, y) - at(x - 1, y));
        const double gy = 0.5 * (at(x, y + 1) - at(x, y - 1));
        out.at(x, y, c) = half[y * W + x];
        out.at(x, y, 3 + c) = blurred[y * W + x];
        out.at(x, y, 6 + c) = std::sqrt(gx * gx + gy * gy);
      }
  }
  return out;
}

}  // namespace consensus
