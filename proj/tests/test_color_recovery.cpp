#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "consensus_mesh/appearance.h"
#include "consensus_mesh/camera.h"
#include "consensus_mesh/color_recovery.h"
#include "consensus_mesh/errors.h"
#include "consensus_mesh/raster.h"
#include "consensus_mesh/synth_model.h"
#include "test_util.h"

using namespace consensus;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// 4 x 4 depth map that is constant, with a single sample point at the center.
DepthMap flat_depth(double z) {
  DepthMap d(4, 4, 100.0);
  for (double& x : d.data()) x = z;
  return d;
}

Points2 center_point() { return Points2::Zero(1, 2); }

SymmetryEncoding one_group(int size) {
  SymmetryEncoding s;
  s.groups.push_back({});
  for (int k = 0; k < size; ++k) s.groups[0].push_back(k);
  s.rebuild_index(size);
  return s;
}

}  // namespace

TEST_CASE("visibility scalar cases") {
  const Eigen::VectorXd Z = Eigen::VectorXd::Constant(1, 2.0);
  VisibilityWeights w = visibility(flat_depth(2.0), center_point(), Z, Eigen::VectorXd::Constant(1, 1.0));
  // D is sqrt(0 + 1e-12) = 1e-6 under the default alpha of 50
  CHECK(w.W(0) == doctest::Approx(std::exp(-50e-6) * sigmoid(20.0)).epsilon(1e-12));
  w = visibility(flat_depth(2.0), center_point(), Z, Eigen::VectorXd::Constant(1, -1.0));
  CHECK(w.W(0) == doctest::Approx(2.06e-9).epsilon(0.01));
  w = visibility(flat_depth(2.1), center_point(), Z, Eigen::VectorXd::Constant(1, 1.0));
  CHECK(w.W(0) == doctest::Approx(std::exp(-5.0) * sigmoid(20.0)).epsilon(1e-9));
  CHECK(w.W(0) == doctest::Approx(6.74e-3).epsilon(1e-3));
  // the same difference measured in units of 2 halves D
  VisibilityOptions opt;
  opt.depth_unit = 2.0;
  w = visibility(flat_depth(2.1), center_point(), Z, Eigen::VectorXd::Constant(1, 1.0), opt);
  CHECK(w.W(0) == doctest::Approx(std::exp(-2.5) * sigmoid(20.0)).epsilon(1e-9));
  opt.alpha = 0.0;
  CHECK_THROWS_AS(visibility(flat_depth(2.0), center_point(), Z, Z, opt), InvalidArgument);
}

TEST_CASE("visibility bounds and backward pass") {
  Rng rng(1);
  DepthMap d(16, 16, 10.0);
  for (double& x : d.data()) x = rng.uniform(1.0, 1.1);
  const int K = 30;
  Points2 v(K, 2);
  Eigen::VectorXd Z(K), N(K), gW(K);
  for (int k = 0; k < K; ++k) {
    // keep samples off pixel-grid lines (pixel centers sit at integer pixel coordinates)
    const Eigen::Vector2d px(std::floor(rng.uniform(1, 14)) + rng.uniform(0.1, 0.9),
                             std::floor(rng.uniform(1, 14)) + rng.uniform(0.1, 0.9));
    v.row(k) = to_image(px, d.size()).transpose();
    Z(k) = rng.uniform(0.95, 1.15);
    N(k) = rng.uniform(-0.3, 0.3);
    gW(k) = rng.normal();
  }
  VisibilityOptions opt;
  opt.depth_unit = 1.7;
  const VisibilityWeights w = visibility(d, v, Z, N, opt);
  for (int k = 0; k < K; ++k) {
    CHECK(w.W(k) >= 0.0);
    CHECK(w.W(k) <= sigmoid(20.0 * N(k)) + 1e-15);
  }
  const VisibilityGradient g = visibility_backward(w, gW);
  const double h = 1e-7;
  for (int k = 0; k < K; ++k) {
    auto W_at = [&](const Points2& vv, const Eigen::VectorXd& zz, const Eigen::VectorXd& nn) {
      return visibility(d, vv, zz, nn, opt).W(k) * gW(k);
    };
    for (int c = 0; c < 2; ++c) {
      Points2 vp = v, vm = v;
      vp(k, c) += h;
      vm(k, c) -= h;
      const double n = (W_at(vp, Z, N) - W_at(vm, Z, N)) / (2 * h);
      CHECK(std::abs(g.v(k, c) - n) / (std::abs(g.v(k, c)) + std::abs(n) + 1e-8) < 1e-4);
    }
    Eigen::VectorXd zp = Z, zm = Z, np = N, nm = N;
    zp(k) += h, zm(k) -= h, np(k) += h, nm(k) -= h;
    const double nz = (W_at(v, zp, N) - W_at(v, zm, N)) / (2 * h);
    const double nn = (W_at(v, Z, np) - W_at(v, Z, nm)) / (2 * h);
    CHECK(std::abs(g.Z(k) - nz) / (std::abs(g.Z(k)) + std::abs(nz) + 1e-8) < 1e-4);
    CHECK(std::abs(g.N(k) - nn) / (std::abs(g.N(k)) + std::abs(nn) + 1e-8) < 1e-4);
  }
}

TEST_CASE("pick colors") {
  ImageRGB img(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) img.at(x, y, 0) = 1.0;
  PickedColors p = pick_colors(img, center_point(), Eigen::VectorXd::Constant(1, 1.0));
  CHECK((p.C_tilde.row(0) - Eigen::RowVector3d(1, 0, 0)).norm() == 0.0);
  p = pick_colors(img, center_point(), Eigen::VectorXd::Constant(1, 0.0));
  CHECK((p.C_tilde.row(0) - Eigen::RowVector3d(-1, 0, 0)).norm() == 0.0);

  ImageRGB c(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) c.at(x, y, 0) = 0.4, c.at(x, y, 1) = 0.8, c.at(x, y, 2) = 0.2;
  p = pick_colors(c, center_point(), Eigen::VectorXd::Constant(1, 0.75));
  CHECK((p.C_tilde.row(0) - Eigen::RowVector3d(0.2, 0.4, 0.1)).norm() < 1e-15);
}

TEST_CASE("pick colors backward") {
  Rng rng(2);
  ImageRGB img(12, 12);
  for (double& x : img.data()) x = rng.uniform();
  const int K = 10;
  Points2 v(K, 2);
  Eigen::VectorXd W(K);
  Colors G(K, 3);
  for (int k = 0; k < K; ++k) {
    const Eigen::Vector2d px(std::floor(rng.uniform(1, 10)) + rng.uniform(0.1, 0.9),
                             std::floor(rng.uniform(1, 10)) + rng.uniform(0.1, 0.9));
    v.row(k) = to_image(px, img.size()).transpose();
    W(k) = rng.uniform();
    for (int c = 0; c < 3; ++c) G(k, c) = rng.normal();
  }
  const PickedColors p = pick_colors(img, v, W);
  const PickGradient g = pick_colors_backward(p, W, G);
  auto loss = [&](const Points2& vv, const Eigen::VectorXd& ww) {
    return (pick_colors(img, vv, ww).C_tilde.array() * G.array()).sum();
  };
  const double h = 1e-7;
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd wp = W, wm = W;
    wp(k) += h, wm(k) -= h;
    CHECK(g.W(k) == doctest::Approx((loss(v, wp) - loss(v, wm)) / (2 * h)).epsilon(1e-6));
    for (int c = 0; c < 2; ++c) {
      Points2 vp = v, vm = v;
      vp(k, c) += h, vm(k, c) -= h;
      CHECK(g.v(k, c) == doctest::Approx((loss(vp, W) - loss(vm, W)) / (2 * h)).epsilon(1e-5));
    }
  }
}

TEST_CASE("symmetry propagation cases") {
  const SymmetryEncoding s = one_group(4);
  const Eigen::RowVector3d c1(0.9, 0.2, 0.4), c2(0.1, 0.6, 0.8);
  auto picked = [&](const Eigen::Vector4d& W, const Colors& samples) {
    Colors Ct(4, 3);
    for (int k = 0; k < 4; ++k) Ct.row(k) = samples.row(k) * (2 * W(k) - 1);
    return Ct;
  };
  Colors samples(4, 3);
  samples << c1, c2, Eigen::RowVector3d(0.3, 0.3, 0.3), Eigen::RowVector3d(0.7, 0.1, 0.5);

  // single visible member
  Eigen::Vector4d W(1, 0, 0, 0);
  ColoredMesh m = propagate_symmetry(picked(W, samples), W, s);
  CHECK(m.observed[0]);
  for (int k = 0; k < 4; ++k) CHECK((m.C.row(k) - c1).norm() == 0.0);

  // two fully visible members average
  W << 1, 1, 0, 0;
  m = propagate_symmetry(picked(W, samples), W, s);
  CHECK((m.group_colors.row(0) - 0.5 * (c1 + c2)).norm() < 1e-15);

  // the 0.3 member has ReLU(2W - 1) = 0 and drops out
  W << 0.9, 0.3, 0, 0;
  m = propagate_symmetry(picked(W, samples), W, s);
  CHECK((m.group_colors.row(0) - c1).norm() < 1e-15);

  // nothing visible: fallback
  W << 0.4, 0.2, 0, 0;
  m = propagate_symmetry(picked(W, samples), W, s, Eigen::Vector3d(0.5, 0.5, 0.5));
  CHECK_FALSE(m.observed[0]);
  CHECK((m.C.row(2) - Eigen::RowVector3d(0.5, 0.5, 0.5)).norm() == 0.0);
  // C = S^T group colors
  const Eigen::MatrixXd S = s.dense(4);
  CHECK((Colors(S.transpose() * m.group_colors) - m.C).norm() == 0.0);
}

TEST_CASE("symmetry propagation backward and forced flags") {
  Rng rng(3);
  const BodyModel& model = test::humanoid();
  const int K = model.num_vertices();
  Eigen::VectorXd W(K);
  Colors Ct(K, 3), G(K, 3);
  for (int k = 0; k < K; ++k) {
    W(k) = rng.uniform();
    for (int c = 0; c < 3; ++c) Ct(k, c) = rng.uniform(-0.5, 1.0), G(k, c) = rng.normal();
  }
  // keep every W away from the ReLU kink at 0.5 so differences see a smooth function
  for (int k = 0; k < K; ++k)
    if (std::abs(W(k) - 0.5) < 0.01) W(k) = 0.6;
  const ColoredMesh m = propagate_symmetry(Ct, W, model.symmetry);
  const PropagateGradient g = propagate_symmetry_backward(m, W, model.symmetry, G);
  auto loss = [&](const Colors& ct, const Eigen::VectorXd& w) {
    return (propagate_symmetry(ct, w, model.symmetry, Eigen::Vector3d::Constant(0.5), &m.observed).C.array() *
            G.array())
        .sum();
  };
  const double h = 1e-6;
  double worst = 0.0;
  for (int k = 0; k < K; k += 7) {
    Eigen::VectorXd wp = W, wm = W;
    wp(k) += h, wm(k) -= h;
    const double n = (loss(Ct, wp) - loss(Ct, wm)) / (2 * h);
    worst = std::max(worst, std::abs(g.W(k) - n) / (std::abs(g.W(k)) + std::abs(n) + 1e-8));
    for (int c = 0; c < 3; ++c) {
      if (std::abs(Ct(k, c)) < 1e-6) continue;
      Colors cp = Ct, cm = Ct;
      cp(k, c) += h, cm(k, c) -= h;
      const double nc = (loss(cp, W) - loss(cm, W)) / (2 * h);
      worst = std::max(worst, std::abs(g.C_tilde(k, c) - nc) / (std::abs(g.C_tilde(k, c)) + std::abs(nc) + 1e-8));
    }
  }
  CHECK(worst < 1e-5);

  // a group forced observed with no visibility mass stays finite
  const SymmetryEncoding s = one_group(2);
  std::vector<char> forced{1};
  const ColoredMesh z =
      propagate_symmetry(Colors::Constant(2, 3, -0.2), Eigen::Vector2d(0.1, 0.2), s, Eigen::Vector3d::Zero(), &forced);
  CHECK(z.C.allFinite());
}

TEST_CASE("part prototypes") {
  PartTable parts;
  parts.names = {"a", "b"};
  parts.vertices = {{0, 1, 2}, {3, 4}};
  parts.rebuild_index(5);
  FeatureMap H(8, 8, 9);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      for (int c = 0; c < 9; ++c) H.at(x, y, c) = 0.1 * c;
  Rng rng(4);
  Points2 v(5, 2);
  for (int k = 0; k < 5; ++k) v.row(k) = Eigen::RowVector2d(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8));
  PartPrototypes P = part_prototypes(H, v, Eigen::VectorXd::Ones(5), parts);
  for (int l = 0; l < 2; ++l)
    for (int c = 0; c < 9; ++c) CHECK(P.F(l, c) == doctest::Approx(0.1 * c).epsilon(1e-14));

  // random map and weights against a naive weighted mean
  for (double& x : H.data()) x = rng.uniform();
  Eigen::VectorXd W(5);
  for (int k = 0; k < 5; ++k) W(k) = rng.uniform();
  P = part_prototypes(H, v, W, parts);
  for (int l = 0; l < 2; ++l) {
    Eigen::VectorXd num = Eigen::VectorXd::Zero(9);
    double den = 0;
    for (int k : parts.vertices[l]) {
      num += W(k) * sample_bilinear(H, v.row(k).transpose());
      den += W(k);
    }
    CHECK((P.F.row(l).transpose() - num / den).norm() < 1e-14);
  }

  // single visible vertex per part
  Eigen::VectorXd one = Eigen::VectorXd::Zero(5);
  one(1) = 1.0;
  one(4) = 1.0;
  P = part_prototypes(H, v, one, parts);
  CHECK((P.F.row(0).transpose() - sample_bilinear(H, v.row(1).transpose())).norm() < 1e-14);
  CHECK((P.F.row(1).transpose() - sample_bilinear(H, v.row(4).transpose())).norm() < 1e-14);

  // unobserved part
  Eigen::VectorXd tiny = Eigen::VectorXd::Constant(5, 1e-4);
  tiny(3) = 1.0;
  P = part_prototypes(H, v, tiny, parts);
  CHECK_FALSE(P.observed[0]);
  CHECK(P.observed[1]);
}

TEST_CASE("builtin features") {
  ImageRGB plain(16, 16, 0.5);
  FeatureMap f = builtin_features(plain);
  CHECK(f.width() == 8);
  CHECK(f.channels() == 9);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      for (int c = 0; c < 6; ++c) CHECK(f.at(x, y, c) == doctest::Approx(0.5).epsilon(1e-14));
      for (int c = 6; c < 9; ++c) CHECK(f.at(x, y, c) == 0.0);
    }
  // checkerboard with 4 px cells: 2 px cells at half resolution, so central differences never vanish
  ImageRGB checker(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      for (int c = 0; c < 3; ++c) checker.at(x, y, c) = ((x / 4 + y / 4) % 2) ? 1.0 : 0.0;
  const FeatureMap g = builtin_features(checker);
  PartTable parts;
  parts.names = {"all"};
  parts.vertices = {{0, 1, 2, 3}};
  parts.rebuild_index(4);
  Points2 v(4, 2);
  v << -0.4, -0.4, 0.4, -0.4, 0.4, 0.4, -0.4, 0.4;
  const PartPrototypes a = part_prototypes(f, v, Eigen::VectorXd::Ones(4), parts);
  const PartPrototypes b = part_prototypes(g, v, Eigen::VectorXd::Ones(4), parts);
  CHECK(b.F.row(0).segment(6, 3).minCoeff() > a.F.row(0).segment(6, 3).maxCoeff() + 0.1);
}

TEST_CASE("exact recovery on a front-facing open surface") {
  // 8 x 8 vertex grid whose vertices sit on pixel centers of a 64 x 64 image
  const ImageSize size{64, 64};
  const int n = 8, K = n * n;
  Points2 v(K, 2);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) v.row(j * n + i) = to_image(Eigen::Vector2d(4 + 8 * i, 4 + 8 * j), size).transpose();
  Faces faces((n - 1) * (n - 1) * 2, 3);
  int f = 0;
  for (int j = 0; j + 1 < n; ++j)
    for (int i = 0; i + 1 < n; ++i) {
      const int a = j * n + i;
      faces.row(f++) << a, a + 1, a + n + 1;
      faces.row(f++) << a, a + n + 1, a + n;
    }
  const Eigen::VectorXd Z = Eigen::VectorXd::Constant(K, 2.0);
  SymmetryEncoding s;
  for (int k = 0; k < K / 2; ++k) s.groups.push_back({k, k + K / 2});
  s.rebuild_index(K);
  Rng rng(9);
  Colors truth(K, 3);
  for (int g = 0; g < s.size(); ++g) {
    const Eigen::RowVector3d c(rng.uniform(), rng.uniform(), rng.uniform());
    for (int k : s.groups[g]) truth.row(k) = c;
  }
  const ImageRGB image = render_colored(v, Z, faces, truth, size).image;
  const DepthMap depth = rasterize_depth(v, Z, faces, size);
  const VisibilityWeights vis = visibility(depth, v, Z, Eigen::VectorXd::Ones(K));
  const PickedColors picked = pick_colors(image, v, vis.W);
  const ColoredMesh m = propagate_symmetry(picked.C_tilde, vis.W, s);
  // border vertices sit on triangle edges and may fall outside the coverage rule; interior ones are visible
  int observed = 0;
  for (int g = 0; g < s.size(); ++g) {
    if (!m.observed[g]) continue;
    ++observed;
    for (int k : s.groups[g]) CHECK((m.C.row(k) - truth.row(k)).cwiseAbs().maxCoeff() < 1e-9);
  }
  CHECK(observed >= (n - 2) * (n - 2) / 2);
}

TEST_CASE("recovery of a rendered humanoid front view") {
  const BodyModel& m = test::humanoid();
  const Colors colors = smooth_palette(m, 5);
  ViewParams params;
  params.theta = Eigen::VectorXd::Zero(m.pose_dim());
  params.camera.rot = front_view_rotation();
  const ImageRGB image = render_with_colors(m, params, colors, {256, 256});
  VisibilityOptions opt;
  opt.depth_unit = body_height(m);
  const Recovery r = recover_colors(m, params, image, opt);
  int observed = 0, close = 0;
  for (int g = 0; g < m.symmetry.size(); ++g) {
    if (!r.mesh.observed[g]) continue;
    ++observed;
    const int k = m.symmetry.groups[g][0];
    if ((r.mesh.C.row(k) - colors.row(k)).cwiseAbs().maxCoeff() < 2.0 / 255.0) ++close;
  }
  // the camera sees the front half of the body
  CHECK(observed > m.symmetry.size() / 3);
  // vertices buried where limbs meet the torso can pass the depth test and pick up the occluder color
  CHECK(close >= 0.9 * observed);

  // black image: every observed group comes out black
  const Recovery black = recover_colors(m, params, ImageRGB(256, 256), opt);
  for (int g = 0; g < m.symmetry.size(); ++g)
    if (black.mesh.observed[g]) CHECK(black.mesh.group_colors.row(g).norm() == 0.0);
}

TEST_CASE("part selection for transfer") {
  const PartTable& parts = test::humanoid().parts;
  auto count = [](const std::vector<char>& s) { return std::count(s.begin(), s.end(), 1); };
  CHECK(count(select_parts(parts, {"all"})) == parts.size());
  CHECK(count(select_parts(parts, {"none"})) == 0);
  const auto upper = select_parts(parts, {"upper_body"});
  const auto lower = select_parts(parts, {"lower_body"});
  for (int p = 0; p < parts.size(); ++p) CHECK(upper[p] + lower[p] == 1);
  CHECK(lower[parts.find("left_upper_leg")] == 1);
  CHECK(upper[parts.find("head")] == 1);
  CHECK(count(select_parts(parts, {"head", "torso"})) == 2);
  CHECK_THROWS_AS(select_parts(parts, {"tail"}), InvalidArgument);

  const Colors a = Colors::Constant(test::humanoid().num_vertices(), 3, 1.0);
  const Colors b = Colors::Zero(test::humanoid().num_vertices(), 3);
  const Colors merged = merge_part_colors(parts, upper, a, b);
  for (int k = 0; k < merged.rows(); ++k) CHECK(merged(k, 0) == (upper[parts.part_of[k]] ? 1.0 : 0.0));
}
