#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "consensus_mesh/errors.h"
#include "consensus_mesh/metrics.h"
#include "consensus_mesh/rotation.h"
#include "consensus_mesh/synth_model.h"
#include "seg_fixture.h"

using namespace consensus;

namespace {

Vertices random_skeleton(Rng& rng, int J) {
  Vertices X(J, 3);
  for (int j = 0; j < J; ++j)
    for (int c = 0; c < 3; ++c) X(j, c) = rng.normal();
  return X;
}

Eigen::Vector3d random_axis_angle(Rng& rng, double max_angle) {
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  return axis.normalized() * rng.uniform(0.0, max_angle);
}

Vertices transform(const Vertices& X, double s, const Eigen::Matrix3d& R, const Eigen::Vector3d& t) {
  return ((s * X * R.transpose()).rowwise() + t.transpose()).eval();
}

double residual(const Vertices& A, const Vertices& B) { return (A - B).squaredNorm(); }

}  // namespace

TEST_CASE("mpjpe") {
  Rng rng(1);
  const Vertices gt = random_skeleton(rng, 15);
  CHECK(mpjpe(gt, gt) == 0.0);
  const Vertices shifted = (gt.rowwise() + Eigen::RowVector3d(1.0, -2.0, 0.5)).eval();
  CHECK(mpjpe(shifted, gt) == doctest::Approx(0.0).epsilon(1e-15).scale(1.0));
  Vertices off = gt;
  off.row(7) += Eigen::RowVector3d(3.0, 4.0, 0.0);
  CHECK(mpjpe(off, gt) == doctest::Approx(5.0 / 15.0).epsilon(1e-14));
  CHECK_THROWS_AS(mpjpe(gt, Vertices(14, 3)), InvalidArgument);
}

TEST_CASE("procrustes recovers an exact similarity") {
  Rng rng(2);
  const Vertices pred = random_skeleton(rng, 15);
  const Eigen::Matrix3d R0 = rodrigues(random_axis_angle(rng, 3.0));
  const Eigen::Vector3d t0(0.3, -1.2, 2.0);
  const Vertices gt = transform(pred, 2.0, R0, t0);
  const Similarity s = procrustes_align(pred, gt);
  CHECK(s.scale == doctest::Approx(2.0).epsilon(1e-12));
  CHECK((s.rotation - R0).norm() < 1e-10);
  CHECK((s.translation - t0).norm() < 1e-10);
  CHECK((s.aligned - gt).norm() < 1e-9);
  CHECK(pa_mpjpe(pred, gt) < 1e-9);
  CHECK(s.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-12));

  const Similarity id = procrustes_align(pred, pred);
  CHECK(id.scale == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((id.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-12);
  CHECK(id.translation.norm() < 1e-12);
  CHECK(pa_mpjpe(pred, pred) < 1e-12);
}

TEST_CASE("procrustes against a random-search oracle") {
  Rng rng(3);
  const Vertices pred = random_skeleton(rng, 15);
  Vertices gt = transform(pred, 0.7, rodrigues(random_axis_angle(rng, 2.0)), Eigen::Vector3d(1, 2, 3));
  for (int j = 0; j < 15; ++j)
    for (int c = 0; c < 3; ++c) gt(j, c) += 0.2 * rng.normal();
  const Similarity best = procrustes_align(pred, gt);
  const double r_best = residual(best.aligned, gt);
  // candidates near the optimum plus fully random ones
  for (int i = 0; i < 10000; ++i) {
    const bool local = i % 2 == 0;
    const double s = local ? best.scale * (1.0 + 0.05 * rng.normal()) : rng.uniform(0.1, 3.0);
    const Eigen::Matrix3d R = local ? Eigen::Matrix3d(rodrigues(random_axis_angle(rng, 0.1)) * best.rotation)
                                    : rodrigues(random_axis_angle(rng, 3.14159));
    const Eigen::Vector3d t = local ? Eigen::Vector3d(best.translation + 0.05 * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()))
                                    : Eigen::Vector3d(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    CHECK(r_best <= residual(transform(pred, s, R, t), gt) + 1e-12);
  }
}

TEST_CASE("procrustes residual is invariant to a pre-applied similarity") {
  Rng rng(4);
  const Vertices pred = random_skeleton(rng, 15);
  const Vertices gt = random_skeleton(rng, 15);
  const double r = residual(procrustes_align(pred, gt).aligned, gt);
  const Vertices moved = transform(pred, 3.0, rodrigues(random_axis_angle(rng, 3.0)), Eigen::Vector3d(-4, 0, 1));
  CHECK(residual(procrustes_align(moved, gt).aligned, gt) == doctest::Approx(r).epsilon(1e-9));
}

TEST_CASE("pa-mpjpe never exceeds mpjpe") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const Vertices a = random_skeleton(rng, 15);
    Vertices b = a;
    for (int j = 0; j < 15; ++j)
      for (int c = 0; c < 3; ++c) b(j, c) += 0.3 * rng.normal();
    b = transform(b, rng.uniform(0.5, 1.5), rodrigues(random_axis_angle(rng, 1.0)), Eigen::Vector3d::Zero());
    CHECK(pa_mpjpe(b, a) <= mpjpe(b, a) + 1e-9);
  }
}

TEST_CASE("degenerate skeletons") {
  Vertices line(5, 3);
  for (int j = 0; j < 5; ++j) line.row(j) = Eigen::RowVector3d(j, 2.0 * j, -j);
  Rng rng(6);
  CHECK_THROWS_AS(procrustes_align(line, random_skeleton(rng, 5)), DegenerateConfiguration);
  CHECK_THROWS_AS(procrustes_align(Vertices::Zero(2, 3), Vertices::Ones(2, 3)), DegenerateConfiguration);
}

TEST_CASE("segmentation metrics") {
  const test::SegFixture f = test::seg_fixture();
  const SegMetrics m = seg_metrics(f.pred, f.gt, 2);
  CHECK(m.accuracy == f.accuracy);
  REQUIRE(m.per_class_f1.size() == 3);
  for (int c = 0; c < 3; ++c) CHECK(m.per_class_f1[c] == f.f1[c]);
  CHECK(m.macro_f1 == doctest::Approx(f.macro_f1).epsilon(1e-15));

  const SegMetrics same = seg_metrics(f.gt, f.gt, 2);
  CHECK(same.accuracy == 1.0);
  CHECK(same.macro_f1 == 1.0);

  LabelMap a{2, 2, {0, 1, 1, 0}}, b{2, 2, {1, 0, 0, 1}};
  CHECK(seg_metrics(a, b, 1).accuracy == 0.0);

  // class 3 absent from both maps scores 1; class 2 present only in gt scores 0
  LabelMap g{2, 1, {0, 2}}, p{2, 1, {0, 1}};
  const SegMetrics e = seg_metrics(p, g, 3);
  CHECK(e.per_class_f1[3] == 1.0);
  CHECK(e.per_class_f1[2] == 0.0);
  CHECK(e.per_class_f1[1] == 0.0);

  CHECK_THROWS_AS(seg_metrics(a, LabelMap{4, 1, {0, 0, 0, 0}}, 1), ResolutionMismatch);
}
