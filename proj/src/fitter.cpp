#include "consensus_mesh/fitter.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "consensus_mesh/errors.h"
#include "consensus_mesh/image_io.h"
#include "consensus_mesh/parallel.h"
#include "consensus_mesh/synth_model.h"

namespace consensus {

namespace {

constexpr int kRhoOffset = 0;
constexpr int kBetaOffset = kLatentDim;
constexpr int kRotOffset = kBetaOffset + kShapeDim;
constexpr int kTOffset = kRotOffset + 3;
constexpr int kLogSOffset = kTOffset + 2;

struct ViewForward {
  LatentVector phi;
  Eigen::VectorXd theta;
  CameraParams cam;
  SkinResult skinned;
  Projection proj;
  Vertices normals;
  Eigen::VectorXd N;
  DepthMap depth;
  VisibilityWeights vis;
  PickedColors picked;
  ColoredMesh mesh;
  PartPrototypes protos;
  bool has_silhouette = false;
  Mask soft;
  Vertices Y;
  bool has_keypoints = false;
  Points2 y;
};

bool uses_keypoints(const FitProblem& p, int i) {
  return p.weights.kp2d > 0.0 && p.views[i].keypoints.rows() > 0;
}

ViewForward forward_view(const FitProblem& p, int i, const ViewVariables& vv, bool jacobians,
                         const FrozenState* frozen) {
  const FitView& view = p.views[i];
  ViewForward f;
  f.phi = vv.phi();
  f.theta = decode_pose(p.prior, f.phi);
  f.cam = vv.camera();
  f.skinned = skin(p.model, vv.beta, f.theta, Eigen::Vector3d::Zero(), jacobians);
  const Vertices& V = f.skinned.vertices;
  f.proj = project(f.cam, V);
  f.normals = vertex_normals(p.model.faces, V);
  f.N = camera_normals(f.cam, f.normals);
  f.depth = frozen ? frozen->depth[i] : rasterize_depth(f.proj.v, f.proj.Z, p.model.faces, view.image.size());
  f.vis = visibility(f.depth, f.proj.v, f.proj.Z, f.N, p.visibility);
  f.picked = pick_colors(view.image, f.proj.v, f.vis.W);
  f.mesh = propagate_symmetry(f.picked.C_tilde, f.vis.W, p.model.symmetry, p.fallback,
                              frozen ? &frozen->groups[i] : nullptr);
  f.protos = part_prototypes(view.features, f.proj.v, f.vis.W, p.model.parts, frozen ? &frozen->parts[i] : nullptr);
  f.has_silhouette = !view.mask.empty();
  if (f.has_silhouette) f.soft = soft_silhouette(f.proj.v, p.model.faces, p.silhouette_tau, view.mask.size());
  f.Y = regress_joints(p.model, V);
  f.has_keypoints = uses_keypoints(p, i);
  if (f.has_keypoints) {
    if (view.keypoints.rows() != f.Y.rows()) throw InvalidArgument("keypoint targets must have one row per joint");
    f.y = project(f.cam, f.Y).v;
  }
  return f;
}

struct ViewUpstream {
  Colors C, C_tilde;
  Eigen::VectorXd W;
  Eigen::MatrixXd F;
  Mask silhouette;  // dL/dA, empty when unused
  Vertices V, Y;
  Points2 y;
  ShapeVector beta = ShapeVector::Zero();
};

Eigen::Matrix<double, kViewVariableCount, 1> backward_view(const FitProblem& p, const ViewForward& f,
                                                            const ViewUpstream& up, bool depth_gradient) {
  const BodyModel& model = p.model;
  const int K = model.num_vertices();
  const Vertices& V = f.skinned.vertices;

  Colors g_Ct = up.C_tilde;
  Eigen::VectorXd g_W = up.W;
  Points2 g_v = Points2::Zero(K, 2);

  const PropagateGradient pg = propagate_symmetry_backward(f.mesh, f.vis.W, model.symmetry, up.C);
  g_Ct += pg.C_tilde;
  g_W += pg.W;
  const PrototypeGradient prg = part_prototypes_backward(f.protos, f.vis.W, model.parts, up.F);
  g_v += prg.v;
  g_W += prg.W;
  const PickGradient pk = pick_colors_backward(f.picked, f.vis.W, g_Ct);
  g_v += pk.v;
  g_W += pk.W;
  VisibilityGradient vg = visibility_backward(f.vis, g_W);
  if (!depth_gradient) {
    vg.v.setZero();
    vg.Z.setZero();
  }
  g_v += vg.v;

  CameraGradient g_cam;
  Vertices g_n = Vertices::Zero(K, 3);
  g_cam.rot += camera_normals_backward(f.cam, f.normals, vg.N, &g_n);
  Vertices g_V = vertex_normals_backward(model.faces, V, g_n);
  g_V += up.V;

  if (f.has_silhouette && !up.silhouette.empty())
    g_v += soft_silhouette_backward(f.proj.v, model.faces, p.silhouette_tau, f.soft, up.silhouette);

  Vertices g_Y = up.Y;
  if (f.has_keypoints) {
    Vertices g_Yk = Vertices::Zero(g_Y.rows(), 3);
    g_cam += project_backward(f.cam, f.Y, up.y, Eigen::VectorXd::Zero(f.Y.rows()), &g_Yk);
    g_Y += g_Yk;
  }
  g_V += model.pose_regressor.transpose() * g_Y;
  g_cam += project_backward(f.cam, V, g_v, vg.Z, &g_V);

  const Eigen::Map<const Eigen::VectorXd> g_vec(g_V.data(), 3 * K);
  const Eigen::VectorXd g_theta = f.skinned.d_theta.transpose() * g_vec;
  const ShapeVector g_beta = f.skinned.d_beta.transpose() * g_vec + up.beta;
  const LatentVector g_phi = p.prior.scale.cwiseProduct(p.prior.basis.transpose() * g_theta);

  Eigen::Matrix<double, kViewVariableCount, 1> g;
  g.segment<kLatentDim>(kRhoOffset) = g_phi.array() * (1.0 - f.phi.array().square());
  g.segment<kShapeDim>(kBetaOffset) = g_beta;
  g.segment<3>(kRotOffset) = g_cam.rot;
  g.segment<2>(kTOffset) = g_cam.t;
  g(kLogSOffset) = g_cam.s * f.cam.s;
  return g;
}

bool is_finite(const LossTerms& t) { return std::isfinite(t.total); }

std::uint64_t restart_seed(std::uint64_t seed, int restart) {
  // splitmix64 finalizer over (seed, restart)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(restart + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

CameraParams ViewVariables::camera() const {
  CameraParams c;
  c.rot = rot;
  c.t = t;
  c.s = std::exp(log_s);
  return c;
}

Eigen::VectorXd FitVariables::pack() const {
  Eigen::VectorXd x(kVariableCount);
  for (int i = 0; i < 2; ++i) {
    const int o = i * kViewVariableCount;
    x.segment<kLatentDim>(o + kRhoOffset) = view[i].rho;
    x.segment<kShapeDim>(o + kBetaOffset) = view[i].beta;
    x.segment<3>(o + kRotOffset) = view[i].rot;
    x.segment<2>(o + kTOffset) = view[i].t;
    x(o + kLogSOffset) = view[i].log_s;
  }
  return x;
}

FitVariables FitVariables::unpack(const Eigen::VectorXd& x) {
  if (x.size() != kVariableCount) throw InvalidArgument("fit variable vector has the wrong length");
  FitVariables v;
  for (int i = 0; i < 2; ++i) {
    const int o = i * kViewVariableCount;
    v.view[i].rho = x.segment<kLatentDim>(o + kRhoOffset);
    v.view[i].beta = x.segment<kShapeDim>(o + kBetaOffset);
    v.view[i].rot = x.segment<3>(o + kRotOffset);
    v.view[i].t = x.segment<2>(o + kTOffset);
    v.view[i].log_s = x(o + kLogSOffset);
  }
  return v;
}

std::vector<std::string> FitVariables::names() {
  std::vector<std::string> out;
  for (const char* img : {"a", "b"}) {
    const std::string p(img);
    for (int c = 0; c < kLatentDim; ++c) out.push_back(p + ".rho[" + std::to_string(c) + "]");
    for (int c = 0; c < kShapeDim; ++c) out.push_back(p + ".beta[" + std::to_string(c) + "]");
    for (int c = 0; c < 3; ++c) out.push_back(p + ".rot[" + std::to_string(c) + "]");
    for (int c = 0; c < 2; ++c) out.push_back(p + ".t[" + std::to_string(c) + "]");
    out.push_back(p + ".log_s");
  }
  return out;
}

FitProblem make_fit_problem(const BodyModel& model, const PosePrior& prior, const ImageRGB& image_a,
                            const ImageRGB& image_b, const Mask* mask_a, const Mask* mask_b, int resolution) {
  if (resolution <= 0) throw InvalidArgument("fitting resolution must be positive");
  if (prior.pose_dim() != model.pose_dim()) throw InvalidArgument("pose prior does not match the model's joint count");
  FitProblem p;
  p.model = model;
  p.prior = prior;
  p.init_rotation = front_view_rotation();
  p.visibility.depth_unit = body_height(model);
  const ImageRGB* images[2] = {&image_a, &image_b};
  const Mask* masks[2] = {mask_a, mask_b};
  for (int i = 0; i < 2; ++i) {
    const ImageRGB& img = *images[i];
    if (img.empty()) throw InvalidArgument("fit images must not be empty");
    const int h = resolution;
    const int w = std::max(1, static_cast<int>(std::lround(static_cast<double>(resolution) * img.width() / img.height())));
    p.views[i].image = resample(img, w, h);
    if (masks[i]) {
      if (masks[i]->width() * img.height() != masks[i]->height() * img.width())
        throw ResolutionMismatch("mask and image aspect ratios differ");
      p.views[i].mask = resample(*masks[i], w, h);
    }
    p.views[i].features = builtin_features(p.views[i].image);
  }
  return p;
}

LossEvaluation total_loss(const FitProblem& p, const FitVariables& x, int iter, const LossOptions& options) {
  const LossWeights& w = p.weights;
  const bool jac = options.with_gradient;
  std::array<ViewForward, 2> f{forward_view(p, 0, x.view[0], jac, options.frozen),
                               forward_view(p, 1, x.view[1], jac, options.frozen)};
  if (options.capture) {
    for (int i = 0; i < 2; ++i) {
      options.capture->depth[i] = f[i].depth;
      options.capture->groups[i] = f[i].mesh.observed;
      options.capture->parts[i] = f[i].protos.observed;
    }
  }

  LossEvaluation out;
  LossTerms& t = out.terms;
  std::array<ViewUpstream, 2> up;
  const int K = p.model.num_vertices();
  for (auto& u : up) {
    u.C = Colors::Zero(K, 3);
    u.C_tilde = Colors::Zero(K, 3);
    u.W = Eigen::VectorXd::Zero(K);
    u.F = Eigen::MatrixXd::Zero(p.model.parts.size(), f[0].protos.F.cols());
    u.V = Vertices::Zero(K, 3);
    u.Y = Vertices::Zero(p.model.num_joints(), 3);
    u.y = Points2::Zero(p.model.num_joints(), 2);
  }

  ColorConsistencyGradient gcc;
  t.color = loss_color_consistency(f[0].mesh, f[1].mesh, f[0].vis.W, f[1].vis.W, w.lambda, jac ? &gcc : nullptr);
  if (jac) {
    up[0].C = w.color * gcc.C_a, up[1].C = w.color * gcc.C_b;
    up[0].C_tilde = w.color * gcc.C_tilde_a, up[1].C_tilde = w.color * gcc.C_tilde_b;
    up[0].W = w.color * gcc.W_a, up[1].W = w.color * gcc.W_b;
  }

  try {
    Eigen::MatrixXd ga, gb;
    t.part = loss_part_prototype(f[0].protos, f[1].protos, jac ? &ga : nullptr, jac ? &gb : nullptr);
    if (jac) up[0].F = w.part * ga, up[1].F = w.part * gb;
  } catch (const NoCommonParts&) {
    t.part = 0.0;
    t.part_dropped = true;
  }

  ShapeVector gsa, gsb;
  t.shape = loss_shape_consistency(x.view[0].beta, x.view[1].beta, &gsa, &gsb);
  const double w_mean = mean_shape_weight(w, iter, options.warmup);
  ShapeVector gma, gmb;
  t.mean_shape = loss_mean_shape(x.view[0].beta, &gma) + loss_mean_shape(x.view[1].beta, &gmb);
  up[0].beta = w.shape * gsa + w_mean * gma;
  up[1].beta = w.shape * gsb + w_mean * gmb;

  for (int i = 0; i < 2; ++i) {
    if (!f[i].has_silhouette) continue;
    Mask g;
    t.silhouette += loss_silhouette(f[i].soft, p.views[i].mask, jac ? &g : nullptr);
    if (jac) {
      for (double& v : g.data()) v *= w.silhouette;
      up[i].silhouette = std::move(g);
    }
  }

  Eigen::MatrixXd g;
  t.mv_mesh = loss_mse(f[0].skinned.vertices, f[1].skinned.vertices, &g);
  up[0].V = w.mv_mesh * g, up[1].V = -w.mv_mesh * g;
  t.mv_pose = loss_mse(f[0].Y, f[1].Y, &g);
  up[0].Y = w.mv_pose * g, up[1].Y = -w.mv_pose * g;
  for (int i = 0; i < 2; ++i) {
    if (!f[i].has_keypoints) continue;
    t.kp2d += loss_mse(f[i].y, p.views[i].keypoints, &g);
    up[i].y = w.kp2d * g;
  }

  t.total = w.color * t.color + w.part * t.part + w.shape * t.shape + w.silhouette * t.silhouette +
            w_mean * t.mean_shape + w.mv_mesh * t.mv_mesh + w.mv_pose * t.mv_pose + w.kp2d * t.kp2d;

  if (jac) {
    out.gradient.resize(kVariableCount);
    for (int i = 0; i < 2; ++i)
      out.gradient.segment<kViewVariableCount>(i * kViewVariableCount) = backward_view(p, f[i], up[i], options.depth_gradient);
  }
  for (int i = 0; i < 2; ++i) {
    ViewState& s = out.views[i];
    s.theta = f[i].theta;
    s.V = f[i].skinned.vertices;
    s.Y = f[i].Y;
    s.v = f[i].proj.v;
    s.Z = f[i].proj.Z;
    s.W = f[i].vis.W;
    s.mesh = std::move(f[i].mesh);
  }
  return out;
}

FitVariables initial_variables(const FitProblem& p) {
  FitVariables x;
  for (int i = 0; i < 2; ++i) {
    ViewVariables& v = x.view[i];
    v.rot = p.init_rotation;
    const Mask& mask = p.views[i].mask;
    if (mask.empty()) continue;
    int x0 = mask.width(), x1 = -1, y0 = mask.height(), y1 = -1;
    for (int y = 0; y < mask.height(); ++y)
      for (int xx = 0; xx < mask.width(); ++xx)
        if (mask.at(xx, y) > 0.5) x0 = std::min(x0, xx), x1 = std::max(x1, xx), y0 = std::min(y0, y), y1 = std::max(y1, y);
    if (x1 < 0) continue;
    const Eigen::Vector2d lo = to_image({x0 - 0.5, y0 - 0.5}, mask.size());
    const Eigen::Vector2d hi = to_image({x1 + 0.5, y1 + 0.5}, mask.size());
    CameraParams unit;
    unit.rot = p.init_rotation;
    const Vertices rest = skin(p.model, ShapeVector::Zero(), p.prior.mean).vertices;
    const Points2 proj = project(unit, rest).v;
    const Eigen::Vector2d mlo = proj.colwise().minCoeff().transpose();
    const Eigen::Vector2d mhi = proj.colwise().maxCoeff().transpose();
    const double s = (hi.y() - lo.y()) / std::max(1e-9, mhi.y() - mlo.y());
    v.log_s = std::log(s);
    v.t = 0.5 * (lo + hi) - s * 0.5 * (mlo + mhi);
  }
  return x;
}

ViewParams view_params(const FitProblem& p, const ViewVariables& v) {
  ViewParams out;
  out.phi = v.phi();
  out.theta = decode_pose(p.prior, *out.phi);
  out.beta = v.beta;
  out.camera = v.camera();
  return out;
}

FitResult fit_pair(const FitProblem& problem, const FitConfig& config) {
  if (config.iterations < 0 || config.restarts < 1 || !(config.learning_rate > 0.0))
    throw InvalidArgument("fit config: iterations >= 0, restarts >= 1 and a positive learning rate are required");
  const FitVariables base = problem.init ? *problem.init : initial_variables(problem);

  struct RestartOutcome {
    bool ok = false;
    Eigen::VectorXd x;
    LossEvaluation final_eval;
    std::vector<LossTerms> trace;
  };
  std::vector<RestartOutcome> outcomes(config.restarts);

  auto run = [&](int r) {
    RestartOutcome& out = outcomes[r];
    Rng rng(restart_seed(config.seed, r));
    FitVariables start = base;
    for (auto& view : start.view)
      for (int c = 0; c < kLatentDim; ++c) {
        double phi = std::tanh(view.rho(c)) + rng.uniform(-config.init_noise, config.init_noise);
        view.rho(c) = std::atanh(std::clamp(phi, -0.999, 0.999));
      }
    Eigen::VectorXd x = start.pack();
    Eigen::VectorXd m = Eigen::VectorXd::Zero(x.size()), v = Eigen::VectorXd::Zero(x.size());
    LossOptions opts;
    opts.warmup = config.warmup;
    opts.depth_gradient = config.depth_gradient;
    double b1t = 1.0, b2t = 1.0;
    for (int it = 0; it < config.iterations; ++it) {
      LossEvaluation e = total_loss(problem, FitVariables::unpack(x), it, opts);
      if (!is_finite(e.terms) || !e.gradient.allFinite()) return;
      out.trace.push_back(e.terms);
      const Eigen::VectorXd& g = e.gradient;
      m = config.adam_beta1 * m + (1.0 - config.adam_beta1) * g;
      v = config.adam_beta2 * v + (1.0 - config.adam_beta2) * g.cwiseProduct(g);
      b1t *= config.adam_beta1;
      b2t *= config.adam_beta2;
      const Eigen::VectorXd m_hat = m / (1.0 - b1t);
      const Eigen::VectorXd v_hat = v / (1.0 - b2t);
      x -= config.learning_rate * (m_hat.array() / (v_hat.array().sqrt() + config.adam_epsilon)).matrix();
      for (int i = 0; i < 2; ++i)
        for (int c = 0; c < kShapeDim; ++c) {
          double& b = x(i * kViewVariableCount + kBetaOffset + c);
          b = std::clamp(b, -kBetaBound, kBetaBound);
        }
    }
    opts.with_gradient = false;
    out.final_eval = total_loss(problem, FitVariables::unpack(x), config.iterations, opts);
    if (!is_finite(out.final_eval.terms)) return;
    out.x = x;
    out.ok = true;
  };
  parallel_for(config.restarts, [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      try {
        run(r);
      } catch (const DegenerateFace&) {
        outcomes[r].ok = false;
      }
    }
  });

  FitResult result;
  int best = -1;
  for (int r = 0; r < config.restarts; ++r) {
    result.restart_losses.push_back(outcomes[r].ok ? outcomes[r].final_eval.terms.total
                                                   : std::numeric_limits<double>::quiet_NaN());
    if (outcomes[r].ok && (best < 0 || outcomes[r].final_eval.terms.total < outcomes[best].final_eval.terms.total))
      best = r;
  }
  if (best < 0) throw Diverged("all " + std::to_string(config.restarts) + " restarts diverged");
  RestartOutcome& win = outcomes[best];
  result.restart = best;
  result.variables = FitVariables::unpack(win.x);
  for (int i = 0; i < 2; ++i) result.params[i] = view_params(problem, result.variables.view[i]);
  result.final_losses = win.final_eval.terms;
  result.views = std::move(win.final_eval.views);
  result.trace = std::move(win.trace);
  return result;
}

namespace {

nlohmann::json terms_json(const LossTerms& t) {
  return {{"total", t.total},         {"color", t.color},         {"part", t.part},
          {"shape", t.shape},         {"silhouette", t.silhouette}, {"mean_shape", t.mean_shape},
          {"mv_mesh", t.mv_mesh},     {"mv_pose", t.mv_pose},     {"kp2d", t.kp2d},
          {"part_dropped", t.part_dropped}};
}

}  // namespace

std::string fit_result_to_json(const FitResult& r) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  const char* keys[2] = {"a", "b"};
  for (int i = 0; i < 2; ++i) j[keys[i]] = nlohmann::json::parse(params_to_json(r.params[i]));
  j["losses"] = terms_json(r.final_losses);
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : r.trace) trace.push_back(terms_json(t));
  j["trace"] = std::move(trace);
  j["restart"] = r.restart;
  nlohmann::json losses = nlohmann::json::array();
  for (double l : r.restart_losses) losses.push_back(std::isfinite(l) ? nlohmann::json(l) : nlohmann::json(nullptr));
  j["restart_losses"] = std::move(losses);
  return j.dump(2);
}

std::string trace_to_csv(const std::vector<LossTerms>& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "iteration,total,color,part,shape,silhouette,mean_shape,mv_mesh,mv_pose,kp2d\n";
  for (size_t i = 0; i < trace.size(); ++i) {
    const LossTerms& t = trace[i];
    os << i << ',' << t.total << ',' << t.color << ',' << t.part << ',' << t.shape << ',' << t.silhouette << ','
       << t.mean_shape << ',' << t.mv_mesh << ',' << t.mv_pose << ',' << t.kp2d << '\n';
  }
  return os.str();
}

GradCheckReport finite_diff_check(const GradientFunction& f, const Eigen::VectorXd& x, double h, double tolerance) {
  if (!(h > 0.0)) throw InvalidArgument("finite difference step must be positive");
  GradCheckReport rep;
  f(x, &rep.analytic);
  const Eigen::Index n = x.size();
  if (rep.analytic.size() != n) throw InvalidArgument("gradient has the wrong length");
  rep.numeric.resize(n);
  rep.rel_error.resize(n);
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    xp(i) = x(i) + h;
    const double fp = f(xp, nullptr);
    xp(i) = x(i) - h;
    const double fm = f(xp, nullptr);
    xp(i) = x(i);
    rep.numeric(i) = (fp - fm) / (2.0 * h);
    rep.rel_error(i) =
        std::abs(rep.analytic(i) - rep.numeric(i)) / (std::abs(rep.analytic(i)) + std::abs(rep.numeric(i)) + 1e-8);
  }
  rep.max_rel_error = n > 0 ? rep.rel_error.maxCoeff() : 0.0;
  if (!std::isfinite(rep.max_rel_error)) rep.max_rel_error = std::numeric_limits<double>::infinity();
  rep.pass = rep.max_rel_error < tolerance;
  return rep;
}

GradCheckReport finite_diff_check(const FitProblem& problem, const FitVariables& x, double h, double tolerance,
                                  int iter) {
  FrozenState frozen;
  LossOptions capture;
  capture.capture = &frozen;
  capture.with_gradient = false;
  total_loss(problem, x, iter, capture);
  auto f = [&](const Eigen::VectorXd& v, Eigen::VectorXd* grad) {
    LossOptions opts;
    opts.frozen = &frozen;
    opts.with_gradient = grad != nullptr;
    LossEvaluation e = total_loss(problem, FitVariables::unpack(v), iter, opts);
    if (grad) *grad = e.gradient;
    return e.terms.total;
  };
  GradCheckReport rep = finite_diff_check(f, x.pack(), h, tolerance);
  rep.names = FitVariables::names();
  return rep;
}

}  // namespace consensus
