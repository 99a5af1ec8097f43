// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: acceptance_tests [--only N[,N...]] [--expect-fail N[,N...]]
// The exit status is nonzero when a criterion outside the expect-fail list
// fails, so known failures stay visible without masking regressions.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "cli.h"
#include "consensus_mesh/appearance.h"
#include "consensus_mesh/camera.h"
#include "consensus_mesh/color_recovery.h"
#include "consensus_mesh/errors.h"
#include "consensus_mesh/fitter.h"
#include "consensus_mesh/metrics.h"
#include "consensus_mesh/model_io.h"
#include "consensus_mesh/rotation.h"
#include "consensus_mesh/scene.h"
#include "consensus_mesh/synth_model.h"
#include "consensus_mesh/verification.h"
#include "seg_fixture.h"
#include "temp_dir.h"

using namespace consensus;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const BodyModel& humanoid() {
  static const BodyModel m = synth_model(0);
  return m;
}
const std::vector<Eigen::VectorXd>& mocap() {
  static const auto poses = synth_mocap(humanoid(), 200, 0);
  return poses;
}
const PosePrior& prior() {
  static const PosePrior p = fit_prior(mocap());
  return p;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Gradient suite at h = 1e-4 over 5 configurations.
Outcome gradient_suite_criterion() {
  const auto t0 = std::chrono::steady_clock::now();
  const GradientSuiteOptions options;
  const GradientSuiteResult r = gradient_suite(humanoid(), prior(), mocap(), options);
  const double t = seconds_since(t0);
  int failing = 0, total = 0;
  for (const auto& rep : r.reports) {
    total += static_cast<int>(rep.rel_error.size());
    for (Eigen::Index i = 0; i < rep.rel_error.size(); ++i) failing += rep.rel_error(i) >= options.tolerance;
  }
  std::ostringstream os;
  os << "max rel error " << fmt("%.3g", r.max_rel_error) << " (tol " << options.tolerance << ", h " << options.h
     << "), " << failing << "/" << total << " components over tolerance, " << fmt("%.1f", t) << " s";
  return {r.pass && t < 60.0, os.str()};
}

ViewParams front_params() {
  ViewParams p;
  p.theta = Eigen::VectorXd::Zero(humanoid().pose_dim());
  p.camera.rot = front_view_rotation();
  return p;
}

// 2. Color recovery of a 256 x 256 front view with known group colors.
Outcome color_recovery_criterion() {
  const auto t0 = std::chrono::steady_clock::now();
  const BodyModel& m = humanoid();
  const Colors colors = smooth_palette(m, 5);
  const ViewParams params = front_params();
  const ImageRGB image = render_with_colors(m, params, colors, {256, 256});
  VisibilityOptions opt;
  opt.depth_unit = body_height(m);
  const Recovery r = recover_colors(m, params, image, opt);
  const double t = seconds_since(t0);
  int observed = 0, within = 0;
  double worst = 0.0;
  for (int g = 0; g < m.symmetry.size(); ++g) {
    if (!r.mesh.observed[g]) continue;
    ++observed;
    const int k = m.symmetry.groups[g][0];
    const double e = (r.mesh.C.row(k) - colors.row(k)).cwiseAbs().maxCoeff();
    worst = std::max(worst, e);
    within += e < 2.0 / 255.0;
  }
  std::ostringstream os;
  os << within << "/" << observed << " observed groups within 2/255, worst " << fmt("%.4f", worst) << ", "
     << fmt("%.2f", t) << " s";
  return {observed > 0 && within == observed && t < 5.0, os.str()};
}

// 3. Groups with a single visible member take its sample exactly; final
// colors are constant over every group.
Outcome symmetry_criterion() {
  const BodyModel& m = humanoid();
  const ViewParams params = front_params();
  const Projection proj = project(params.camera, skin(m, params.beta, params.theta).vertices);
  Rng rng(3);
  ImageRGB image(128, 128);
  for (double& x : image.data()) x = rng.uniform();
  Eigen::VectorXd W = Eigen::VectorXd::Zero(m.num_vertices());
  std::vector<int> chosen;
  for (int g = 0; g < m.symmetry.size(); ++g) {
    const auto& members = m.symmetry.groups[g];
    chosen.push_back(members[g % members.size()]);
    W(chosen.back()) = 1.0;
  }
  const PickedColors picked = pick_colors(image, proj.v, W);
  const ColoredMesh mesh = propagate_symmetry(picked.C_tilde, W, m.symmetry);
  int exact = 0;
  for (int g = 0; g < m.symmetry.size(); ++g)
    exact += mesh.observed[g] && mesh.group_colors.row(g) == picked.samples.row(chosen[g]);
  // group constancy, also on a full recovery from a rendered image
  VisibilityOptions opt;
  opt.depth_unit = body_height(m);
  const Recovery full = recover_colors(m, params, render_with_colors(m, params, smooth_palette(m, 1), {128, 128}), opt);
  int constant = 0, vertices = 0;
  for (const ColoredMesh* cm : {&mesh, &full.mesh})
    for (int g = 0; g < m.symmetry.size(); ++g)
      for (int k : m.symmetry.groups[g]) {
        ++vertices;
        constant += cm->C.row(k) == cm->group_colors.row(g);
      }
  std::ostringstream os;
  os << exact << "/" << m.symmetry.size() << " single-member groups exact, " << constant << "/" << vertices
     << " vertex rows equal their group color";
  return {exact == m.symmetry.size() && constant == vertices, os.str()};
}

// Axis-angle of the rotation taking +x onto d.
Eigen::Vector3d aim_x(const Eigen::Vector3d& d) {
  const Eigen::AngleAxisd aa(Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitX(), d.normalized()));
  return aa.angle() * aa.axis();
}

int joint_index(const BodyModel& m, const std::string& name) {
  for (size_t i = 0; i < m.joint_names.size(); ++i)
    if (m.joint_names[i] == name) return static_cast<int>(i);
  throw InvalidArgument("no joint " + name);
}

// 4. Arm folded across the chest: visibility weights against a ray-cast oracle.
Outcome occlusion_criterion() {
  const BodyModel& m = humanoid();
  ViewParams params = front_params();
  // upper arm forward and down, forearm back across the chest
  const Eigen::Vector3d upper = aim_x({0.25, -0.6, 0.75});
  const Eigen::Vector3d fore = aim_x({-1.0, 0.0, 0.1});
  const Eigen::Matrix3d R1 = rodrigues(upper);
  const Eigen::AngleAxisd elbow(R1.transpose() * rodrigues(fore));
  params.theta.segment<3>(3 * (joint_index(m, "left_shoulder") - 1)) = upper;
  params.theta.segment<3>(3 * (joint_index(m, "left_elbow") - 1)) = elbow.angle() * elbow.axis();

  const Vertices V = skin(m, params.beta, params.theta).vertices;
  const Projection p = project(params.camera, V);
  const Eigen::VectorXd N = camera_normals(params.camera, vertex_normals(m, V));
  const ImageSize size{256, 256};
  VisibilityOptions opt;
  opt.alpha = 50.0;
  opt.gamma = 20.0;
  opt.depth_unit = body_height(m);
  const VisibilityWeights vis = visibility(rasterize_depth(p.v, p.Z, m.faces, size), p.v, p.Z, N, opt);

  // orthographic ray toward the camera: occluded when a face not touching the
  // vertex covers its image position at a smaller depth
  auto occluded = [&](int k) {
    const Eigen::Vector2d q = p.v.row(k).transpose();
    for (int f = 0; f < m.faces.rows(); ++f) {
      const int a = m.faces(f, 0), b = m.faces(f, 1), c = m.faces(f, 2);
      if (a == k || b == k || c == k) continue;
      const Eigen::Vector2d A = p.v.row(a), B = p.v.row(b), C = p.v.row(c);
      const double area = (B - A).x() * (C - A).y() - (B - A).y() * (C - A).x();
      if (std::abs(area) < 1e-15) continue;
      const double l1 = ((C - B).x() * (q - B).y() - (C - B).y() * (q - B).x()) / area;
      const double l2 = ((A - C).x() * (q - C).y() - (A - C).y() * (q - C).x()) / area;
      const double l3 = 1.0 - l1 - l2;
      if (l1 < 0 || l2 < 0 || l3 < 0) continue;
      if (l1 * p.Z(a) + l2 * p.Z(b) + l3 * p.Z(c) < p.Z(k) - 1e-6) return true;
    }
    return false;
  };
  const int torso = m.parts.find("torso");
  const int l_upper = m.parts.find("left_upper_arm"), l_lower = m.parts.find("left_lower_arm");
  int vis_total = 0, vis_ok = 0, occ_total = 0, occ_ok = 0;
  for (int k = 0; k < m.num_vertices(); ++k) {
    if (N(k) <= 0.0) continue;
    const int part = m.parts.part_of[k];
    const bool hidden = occluded(k);
    if ((part == l_upper || part == l_lower) && !hidden) {
      ++vis_total;
      vis_ok += vis.W(k) > 0.9;
    } else if (part == torso && hidden) {
      ++occ_total;
      occ_ok += vis.W(k) < 0.1;
    }
  }
  const double vis_frac = vis_total ? static_cast<double>(vis_ok) / vis_total : 0.0;
  const double occ_frac = occ_total ? static_cast<double>(occ_ok) / occ_total : 0.0;
  std::ostringstream os;
  os << "visible arm vertices W > 0.9: " << vis_ok << "/" << vis_total << " (" << fmt("%.1f", 100 * vis_frac)
     << "%), occluded torso vertices W < 0.1: " << occ_ok << "/" << occ_total << " (" << fmt("%.1f", 100 * occ_frac)
     << "%)";
  return {vis_total > 0 && occ_total > 0 && vis_frac >= 0.95 && occ_frac >= 0.95, os.str()};
}

// 5. Round-trip fit from an initialization about 15% of body height away.
Outcome round_trip_criterion() {
  setenv("CONSENSUS_MESH_THREADS", "1", 1);
  const auto t0 = std::chrono::steady_clock::now();
  const BodyModel& m = humanoid();
  ScenePairOptions so;
  so.resolution = 128;
  const ScenePair scene = synth_pair(m, prior(), mocap(), 1, so);
  FitProblem problem = make_fit_problem(m, prior(), scene.views[0].image, scene.views[1].image, &scene.views[0].mask,
                                        &scene.views[1].mask, 128);
  const double height = body_height(m, scene.beta);
  FitVariables init = initial_variables(problem);
  double init_pa[2];
  for (int i = 0; i < 2; ++i) {
    const LatentVector truth = *scene.views[i].params.phi;
    auto pa_of = [&](const LatentVector& phi) {
      const Vertices V = skin(m, scene.beta, decode_pose(prior(), phi)).vertices;
      return pa_mpjpe(regress_joints(m, V), scene.views[i].Y) / height;
    };
    // move toward another MoCap pose far enough away, then bisect to 15%
    LatentVector other = truth;
    for (int j = 0; j < 200; ++j) {
      other = encode_pose(prior(), mocap()[(37 * j + 11 * i + 5) % 200]).cwiseMax(-0.95).cwiseMin(0.95);
      if (pa_of(other) > 0.15) break;
    }
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (lo + hi);
      (pa_of(truth + mid * (other - truth)) < 0.15 ? lo : hi) = mid;
    }
    const LatentVector start = truth + lo * (other - truth);
    init_pa[i] = pa_of(start);
    init.view[i].rho = start.array().atanh();
  }
  problem.init = init;
  FitConfig config;  // 500 iterations, 4 restarts
  config.resolution = 128;
  const FitResult r = fit_pair(problem, config);
  const double t = seconds_since(t0);
  double pa[2], color[2];
  bool ok = t < 300.0;
  for (int i = 0; i < 2; ++i) {
    pa[i] = pa_mpjpe(r.views[i].Y, scene.views[i].Y) / height;
    double sum = 0.0;
    int n = 0;
    for (int g = 0; g < m.symmetry.size(); ++g) {
      if (!r.views[i].mesh.observed[g]) continue;
      const int k = m.symmetry.groups[g][0];
      sum += (r.views[i].mesh.C.row(k) - scene.colors.row(k)).cwiseAbs().mean();
      ++n;
    }
    color[i] = n ? sum / n : 1.0;
    ok = ok && pa[i] < 0.05 && color[i] < 0.05;
  }
  std::ostringstream os;
  os << "PA-MPJPE/height a " << fmt("%.3f", init_pa[0]) << " -> " << fmt("%.3f", pa[0]) << ", b "
     << fmt("%.3f", init_pa[1]) << " -> " << fmt("%.3f", pa[1]) << "; color error " << fmt("%.3f", color[0]) << ", "
     << fmt("%.3f", color[1]) << "; " << fmt("%.0f", t) << " s";
  return {ok, os.str()};
}

Vertices random_skeleton(Rng& rng, int J) {
  Vertices X(J, 3);
  for (int j = 0; j < J; ++j)
    for (int c = 0; c < 3; ++c) X(j, c) = rng.normal();
  return X;
}

// 6. Procrustes.
Outcome procrustes_criterion() {
  const BodyModel& m = humanoid();
  const Vertices Y = regress_joints(m, skin(m, ShapeVector::Zero(), mocap()[42]).vertices);
  const Eigen::Matrix3d R = rodrigues(Eigen::Vector3d(0.3, -1.1, 2.0));
  const Vertices moved = ((1.7 * Y * R.transpose()).rowwise() + Eigen::RowVector3d(0.5, -2.0, 4.0)).eval();
  const double exact = pa_mpjpe(moved, Y);
  Rng rng(6);
  int ordered = 0;
  for (int i = 0; i < 100; ++i) {
    const Vertices a = random_skeleton(rng, Y.rows());
    const Vertices b = random_skeleton(rng, Y.rows());
    ordered += pa_mpjpe(a, b) <= mpjpe(a, b);
  }
  std::ostringstream os;
  os << "similarity copy PA-MPJPE " << fmt("%.2e", exact) << ", PA <= MPJPE on " << ordered << "/100 random pairs";
  return {exact < 1e-9 && ordered == 100, os.str()};
}

// 7. Identical images and identical variables.
Outcome identity_criterion() {
  const BodyModel& m = humanoid();
  ScenePairOptions so;
  so.resolution = 128;
  const ScenePair scene = synth_pair(m, prior(), mocap(), 2, so);
  const SceneView& v = scene.views[0];
  const FitProblem problem = make_fit_problem(m, prior(), v.image, v.image, &v.mask, &v.mask, 128);
  FitVariables x;
  x.view[0].rho = v.params.phi->array().atanh();
  x.view[0].beta = v.params.beta;
  x.view[0].rot = v.params.camera.rot;
  x.view[0].t = v.params.camera.t;
  x.view[0].log_s = std::log(v.params.camera.s);
  x.view[1] = x.view[0];
  const LossTerms t = total_loss(problem, x, 0).terms;
  std::ostringstream os;
  os << "L_CC " << t.color << ", L_P " << t.part << ", L_beta " << t.shape;
  return {t.color == 0.0 && t.part == 0.0 && t.shape == 0.0 && !t.part_dropped, os.str()};
}

// 8. Two fit-pair runs with the same seed.
Outcome determinism_criterion() {
  test::TempDir dir("acceptance_determinism");
  auto run = [](std::vector<std::string> args) {
    args.insert(args.begin(), "consensus_mesh");
    return cli::run(args);
  };
  const std::string root = dir.path().string();
  if (run({"scene", "--seed", "4", "--resolution", "64", "--out", root + "/scene"}) != cli::kSuccess)
    return {false, "scene generation failed"};
  write_text_file(root + "/config.json", R"({"iterations": 40, "restarts": 2, "resolution": 64})");
  for (const char* out : {"/run1", "/run2"}) {
    const int code = run({"fit-pair", "--model", root + "/scene/model.json", "--mocap", root + "/scene/mocap.json",
                          "--image-a", root + "/scene/image_a.png", "--image-b", root + "/scene/image_b.png",
                          "--mask-a", root + "/scene/mask_a.png", "--mask-b", root + "/scene/mask_b.png", "--config",
                          root + "/config.json", "--seed", "9", "--out", root + out});
    if (code != cli::kSuccess) return {false, "fit-pair exited with " + std::to_string(code)};
  }
  bool same = true;
  for (const char* f : {"/params_a.json", "/params_b.json"})
    same = same && read_text_file(root + "/run1" + f) == read_text_file(root + "/run2" + f);
  return {same, same ? "params_a.json and params_b.json byte-identical" : "params JSON differs between runs"};
}

// 9. Hand-counted segmentation fixture.
Outcome seg_criterion() {
  const test::SegFixture f = test::seg_fixture();
  const SegMetrics s = seg_metrics(f.pred, f.gt, 2);
  bool ok = s.accuracy == f.accuracy && s.per_class_f1.size() == 3;
  for (int c = 0; ok && c < 3; ++c) ok = s.per_class_f1[c] == f.f1[c];
  ok = ok && std::abs(s.macro_f1 - f.macro_f1) < 1e-15;
  std::ostringstream os;
  os << "accuracy " << s.accuracy << " (oracle " << f.accuracy << "), macro F1 " << s.macro_f1 << " (oracle "
     << f.macro_f1 << ")";
  return {ok, os.str()};
}

std::set<int> parse_list(const std::string& text) {
  std::set<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, expect_fail;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if ((a == "--only" || a == "--expect-fail") && i + 1 < argc) {
      (a == "--only" ? only : expect_fail) = parse_list(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--only N,...] [--expect-fail N,...]\n", argv[0]);
      return 2;
    }
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient suite", gradient_suite_criterion},
      {"color-recovery exactness", color_recovery_criterion},
      {"symmetry propagation", symmetry_criterion},
      {"occlusion discrimination", occlusion_criterion},
      {"round-trip fit", round_trip_criterion},
      {"procrustes", procrustes_criterion},
      {"identity-pair zero loss", identity_criterion},
      {"determinism", determinism_criterion},
      {"metric fixtures", seg_criterion},
  };
  int unexpected = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool expected = expect_fail.count(id) > 0;
    std::printf("CRITERION %d %s %s: %s%s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str(),
                !o.pass && expected ? " [known failure]" : "");
    std::fflush(stdout);
    if (!o.pass && !expected) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
