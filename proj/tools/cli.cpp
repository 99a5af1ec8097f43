#include "cli.h"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "consensus_mesh/appearance.h"
#include "consensus_mesh/camera.h"
#include "consensus_mesh/errors.h"
#include "consensus_mesh/fitter.h"
#include "consensus_mesh/image_io.h"
#include "consensus_mesh/mesh_io.h"
#include "consensus_mesh/metrics.h"
#include "consensus_mesh/model_io.h"
#include "consensus_mesh/pose_prior.h"
#include "consensus_mesh/scene.h"
#include "consensus_mesh/synth_model.h"
#include "consensus_mesh/verification.h"

namespace consensus::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kDefaultMocapPoses = 200;

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir);
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) ensure_directory(parent.string());
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

BodyModel model_or_default(const std::string& path) { return path.empty() ? synth_model(0) : load_model(path); }

std::vector<Eigen::VectorXd> mocap_or_default(const BodyModel& model, const std::string& path) {
  if (!path.empty()) {
    auto poses = load_mocap(path);
    if (!poses.empty() && poses.front().size() != model.pose_dim())
      throw InvalidArgument(path + ": pose length does not match the model");
    return poses;
  }
  return synth_mocap(model, kDefaultMocapPoses, 0);
}

Eigen::MatrixXd matrix_from_json(const json& j, int cols, const std::string& what) {
  if (!j.is_array()) throw FormatError(what + " must be an array of rows");
  Eigen::MatrixXd m(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols)
      throw FormatError(what + " rows must hold " + std::to_string(cols) + " numbers");
    for (int c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw FormatError(what + " must be numeric");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

// Skeleton file {"joints": [[x, y, z], ...]} or parameter file (needs a model).
Vertices load_skeleton(const std::string& path, const std::optional<BodyModel>& model) {
  const json j = parse_json_file(path);
  if (j.is_object() && j.contains("joints")) {
    const Eigen::MatrixXd m = matrix_from_json(j.at("joints"), 3, path + ": joints");
    return Vertices(m);
  }
  if (!model) throw InvalidArgument(path + ": parameter files need --model");
  const ViewParams p = params_from_json(j.dump());
  if (p.theta.size() != model->pose_dim()) throw InvalidArgument(path + ": theta size does not match the model");
  return regress_joints(*model, skin(*model, p.beta, p.theta).vertices);
}

void apply_config(const json& j, FitConfig& config, LossWeights& weights, VisibilityOptions& visibility) {
  if (!j.is_object()) throw FormatError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "weights") {
      if (!value.is_object()) throw FormatError("config weights must be an object");
      for (const auto& [wkey, w] : value.items()) {
        if (!w.is_number()) throw FormatError("weight " + wkey + " must be a number");
        const double x = w.get<double>();
        if (wkey == "color") weights.color = x;
        else if (wkey == "lambda") weights.lambda = x;
        else if (wkey == "part") weights.part = x;
        else if (wkey == "shape") weights.shape = x;
        else if (wkey == "silhouette") weights.silhouette = x;
        else if (wkey == "mean_shape") weights.mean_shape = x;
        else if (wkey == "mv_mesh") weights.mv_mesh = x;
        else if (wkey == "mv_pose") weights.mv_pose = x;
        else if (wkey == "kp2d") weights.kp2d = x;
        else throw FormatError("unknown weight in config: " + wkey);
      }
    } else if (key == "alpha") {
      visibility.alpha = value.get<double>();
    } else if (key == "gamma") {
      visibility.gamma = value.get<double>();
    } else if (key == "iterations") {
      config.iterations = value.get<int>();
    } else if (key == "learning_rate") {
      config.learning_rate = value.get<double>();
    } else if (key == "restarts") {
      config.restarts = value.get<int>();
    } else if (key == "warmup") {
      config.warmup = value.get<int>();
    } else if (key == "seed") {
      config.seed = value.get<std::uint64_t>();
    } else if (key == "resolution") {
      config.resolution = value.get<int>();
    } else if (key == "init_noise") {
      config.init_noise = value.get<double>();
    } else if (key == "adam_beta1") {
      config.adam_beta1 = value.get<double>();
    } else if (key == "adam_beta2") {
      config.adam_beta2 = value.get<double>();
    } else if (key == "adam_epsilon") {
      config.adam_epsilon = value.get<double>();
    } else if (key == "depth_gradient") {
      config.depth_gradient = value.get<bool>();
    } else {
      throw FormatError("unknown config key: " + key);
    }
  }
}

void validate_fit_config(const FitConfig& c, const VisibilityOptions& v) {
  if (c.iterations < 0) throw InvalidArgument("iterations must be non-negative");
  if (c.restarts < 1) throw InvalidArgument("restarts must be at least 1");
  if (c.resolution < 8) throw InvalidArgument("resolution must be at least 8");
  if (!(c.learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (c.warmup < 0) throw InvalidArgument("warmup must be non-negative");
  if (!(v.alpha >= 0.0) || !(v.gamma >= 0.0)) throw InvalidArgument("alpha and gamma must be non-negative");
}

void write_report(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
  } else {
    ensure_parent(path);
    write_text_file(path, text + "\n");
  }
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::uint64_t seed = 0;
  int vertices = 600;
  int joints = 15;
  int poses = kDefaultMocapPoses;
  std::string out = "synth_out";
};

int cmd_synth(const SynthArgs& a) {
  ensure_directory(a.out);
  const BodyModel model = synth_model(a.seed, a.vertices, a.joints);
  save_model(join(a.out, "model.json"), model);
  save_mocap(join(a.out, "mocap.json"), synth_mocap(model, a.poses, a.seed));
  ViewParams rest;
  rest.theta = Eigen::VectorXd::Zero(model.pose_dim());
  rest.camera.rot = front_view_rotation();
  const Colors colors = smooth_palette(model, a.seed);
  write_png(join(a.out, "preview.png"), render_with_colors(model, rest, colors, {256, 256}));
  std::cout << "model: " << model.num_vertices() << " vertices, " << model.num_joints() << " joints, "
            << model.num_faces() << " faces, " << model.symmetry.size() << " symmetry groups\n";
  return kSuccess;
}

struct RenderArgs {
  std::string model, params, colors, out, depth, parts, mask;
  int resolution = 512;
};

int cmd_render(const RenderArgs& a) {
  for (const auto* p : {&a.out, &a.depth, &a.parts, &a.mask})
    if (!p->empty()) ensure_parent(*p);
  if (a.resolution < 1) throw InvalidArgument("resolution must be positive");
  const BodyModel model = load_model(a.model);
  const ViewParams params = load_params(a.params);
  if (params.theta.size() != model.pose_dim()) throw InvalidArgument(a.params + ": theta size does not match the model");
  const Colors colors = a.colors.empty() ? Colors(Colors::Constant(model.num_vertices(), 3, 0.5)) : load_colors(a.colors);
  const SceneView view = render_scene_view(model, params, colors, {a.resolution, a.resolution});
  write_png(a.out, view.image);
  if (!a.depth.empty()) write_pfm(a.depth, view.depth);
  if (!a.parts.empty()) write_label_png(a.parts, view.parts);
  if (!a.mask.empty()) write_png(a.mask, view.mask);
  return kSuccess;
}

struct RecoverArgs {
  std::string model, params, image, out, report;
  double alpha = 50.0, gamma = 20.0;
};

int cmd_recover(const RecoverArgs& a) {
  ensure_parent(a.out);
  if (!a.report.empty()) ensure_parent(a.report);
  const BodyModel model = load_model(a.model);
  const ViewParams params = load_params(a.params);
  const ImageRGB image = read_png_rgb(a.image);
  VisibilityOptions vis;
  vis.alpha = a.alpha;
  vis.gamma = a.gamma;
  vis.depth_unit = body_height(model);
  const Recovery r = recover_colors(model, params, image, vis);
  write_ply(a.out, r.V, model.faces, r.mesh.C);
  json report;
  json unobserved = json::array();
  int observed = 0;
  for (int g = 0; g < model.symmetry.size(); ++g) {
    if (r.mesh.observed[g]) ++observed;
    else unobserved.push_back(g);
  }
  report["groups"] = model.symmetry.size();
  report["observed"] = observed;
  report["unobserved_groups"] = std::move(unobserved);
  json colors = json::array();
  for (int g = 0; g < model.symmetry.size(); ++g)
    colors.push_back({r.mesh.group_colors(g, 0), r.mesh.group_colors(g, 1), r.mesh.group_colors(g, 2)});
  report["group_colors"] = std::move(colors);
  if (!a.report.empty()) write_report(a.report, report.dump(2));
  return kSuccess;
}

struct FitArgs {
  std::string model, mocap, config, image_a, image_b, mask_a, mask_b, keypoints_a, keypoints_b;
  std::string out = "fit_out";
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations, restarts, resolution, warmup;
  std::optional<double> lr, alpha, gamma;
  std::optional<double> w_color, w_lambda, w_part, w_shape, w_silhouette, w_mean_shape, w_mv_mesh, w_mv_pose, w_kp2d;
};

int cmd_fit_pair(const FitArgs& a) {
  FitConfig config;
  LossWeights weights;
  VisibilityOptions vis;
  if (!a.config.empty()) apply_config(parse_json_file(a.config), config, weights, vis);
  if (a.seed) config.seed = *a.seed;
  if (a.iterations) config.iterations = *a.iterations;
  if (a.restarts) config.restarts = *a.restarts;
  if (a.resolution) config.resolution = *a.resolution;
  if (a.warmup) config.warmup = *a.warmup;
  if (a.lr) config.learning_rate = *a.lr;
  if (a.alpha) vis.alpha = *a.alpha;
  if (a.gamma) vis.gamma = *a.gamma;
  const std::pair<const std::optional<double>*, double*> overrides[] = {
      {&a.w_color, &weights.color},       {&a.w_lambda, &weights.lambda},
      {&a.w_part, &weights.part},         {&a.w_shape, &weights.shape},
      {&a.w_silhouette, &weights.silhouette}, {&a.w_mean_shape, &weights.mean_shape},
      {&a.w_mv_mesh, &weights.mv_mesh},   {&a.w_mv_pose, &weights.mv_pose},
      {&a.w_kp2d, &weights.kp2d}};
  for (const auto& [flag, target] : overrides)
    if (*flag) *target = **flag;
  validate_fit_config(config, vis);
  ensure_directory(a.out);

  const BodyModel model = model_or_default(a.model);
  const PosePrior prior = fit_prior(mocap_or_default(model, a.mocap));
  const ImageRGB image_a = read_png_rgb(a.image_a);
  const ImageRGB image_b = read_png_rgb(a.image_b);
  std::optional<Mask> mask_a, mask_b;
  if (!a.mask_a.empty()) mask_a = read_png_mask(a.mask_a);
  if (!a.mask_b.empty()) mask_b = read_png_mask(a.mask_b);
  FitProblem problem = make_fit_problem(model, prior, image_a, image_b, mask_a ? &*mask_a : nullptr,
                                        mask_b ? &*mask_b : nullptr, config.resolution);
  problem.weights = weights;
  problem.visibility.alpha = vis.alpha;
  problem.visibility.gamma = vis.gamma;
  const std::string* keypoints[2] = {&a.keypoints_a, &a.keypoints_b};
  for (int i = 0; i < 2; ++i)
    if (!keypoints[i]->empty())
      problem.views[i].keypoints =
          Points2(matrix_from_json(parse_json_file(*keypoints[i]), 2, *keypoints[i]));

  const FitResult result = fit_pair(problem, config);
  save_params(join(a.out, "params_a.json"), result.params[0]);
  save_params(join(a.out, "params_b.json"), result.params[1]);
  write_text_file(join(a.out, "fit.json"), fit_result_to_json(result));
  write_text_file(join(a.out, "trace.csv"), trace_to_csv(result.trace));
  write_ply(join(a.out, "mesh_a.ply"), result.views[0].V, model.faces, result.views[0].mesh.C);
  write_ply(join(a.out, "mesh_b.ply"), result.views[1].V, model.faces, result.views[1].mesh.C);
  std::cout << "restart " << result.restart << ", final loss " << result.final_losses.total << '\n';
  return kSuccess;
}

struct GradcheckArgs {
  std::string model, mocap, out;
  GradientSuiteOptions options;
};

int cmd_gradcheck(const GradcheckArgs& a) {
  if (a.options.configurations < 1) throw InvalidArgument("configs must be at least 1");
  if (!(a.options.h > 0.0)) throw InvalidArgument("h must be positive");
  if (a.options.resolution < 8) throw InvalidArgument("resolution must be at least 8");
  const BodyModel model = model_or_default(a.model);
  const auto mocap = mocap_or_default(model, a.mocap);
  const PosePrior prior = fit_prior(mocap);
  const GradientSuiteResult result = gradient_suite(model, prior, mocap, a.options);
  write_report(a.out, gradient_suite_to_json(result, a.options));
  return result.pass ? kSuccess : kVerificationFailure;
}

struct TransferArgs {
  std::string model, source_image, source_params, target_params, target_image, out;
  std::string parts = "all";
  int resolution = 0;
  double alpha = 50.0, gamma = 20.0;
};

int cmd_transfer(const TransferArgs& a) {
  ensure_parent(a.out);
  const BodyModel model = load_model(a.model);
  const std::vector<char> selected = select_parts(model.parts, split_list(a.parts));
  const bool needs_target = std::find(selected.begin(), selected.end(), 0) != selected.end();
  if (needs_target && a.target_image.empty())
    throw InvalidArgument("--target-image is required unless every part comes from the source");
  VisibilityOptions vis;
  vis.alpha = a.alpha;
  vis.gamma = a.gamma;
  vis.depth_unit = body_height(model);
  const ViewParams target_params = load_params(a.target_params);
  const Recovery source = recover_colors(model, load_params(a.source_params), read_png_rgb(a.source_image), vis);
  Colors colors = source.mesh.C;
  ImageSize size{a.resolution, a.resolution};
  if (!a.target_image.empty()) {
    const ImageRGB target_image = read_png_rgb(a.target_image);
    if (a.resolution <= 0) size = target_image.size();
    const Recovery target = recover_colors(model, target_params, target_image, vis);
    colors = merge_part_colors(model.parts, selected, source.mesh.C, target.mesh.C);
  }
  if (size.width <= 0) size = {512, 512};
  write_png(a.out, render_with_colors(model, target_params, colors, size));
  return kSuccess;
}

struct EvalArgs {
  std::string model, pred, gt, pred_labels, gt_labels, out;
  int classes = 0;
};

int cmd_eval(const EvalArgs& a) {
  const bool skeletons = !a.pred.empty() || !a.gt.empty();
  const bool labels = !a.pred_labels.empty() || !a.gt_labels.empty();
  if (!skeletons && !labels) throw InvalidArgument("give --pred/--gt and/or --pred-labels/--gt-labels");
  if (skeletons && (a.pred.empty() || a.gt.empty())) throw InvalidArgument("--pred and --gt go together");
  if (labels && (a.pred_labels.empty() || a.gt_labels.empty()))
    throw InvalidArgument("--pred-labels and --gt-labels go together");
  if (labels && a.classes < 1) throw InvalidArgument("--classes must be at least 1 for label maps");
  std::optional<BodyModel> model;
  if (!a.model.empty()) model = load_model(a.model);
  json report;
  if (skeletons) {
    const Vertices pred = load_skeleton(a.pred, model);
    const Vertices gt = load_skeleton(a.gt, model);
    report["mpjpe"] = mpjpe(pred, gt);
    report["pa_mpjpe"] = pa_mpjpe(pred, gt);
    report["joints"] = gt.rows();
  }
  if (labels) {
    const SegMetrics m = seg_metrics(read_label_png(a.pred_labels), read_label_png(a.gt_labels), a.classes);
    report["accuracy"] = m.accuracy;
    report["macro_f1"] = m.macro_f1;
    report["per_class_f1"] = m.per_class_f1;
  }
  write_report(a.out, report.dump(2));
  return kSuccess;
}

struct SceneArgs {
  std::string model, mocap;
  std::string out = "scene_out";
  std::uint64_t seed = 0;
  ScenePairOptions options;
};

int cmd_scene(const SceneArgs& a) {
  ensure_directory(a.out);
  const BodyModel model = model_or_default(a.model);
  const auto mocap = mocap_or_default(model, a.mocap);
  const PosePrior prior = fit_prior(mocap);
  const ScenePair pair = synth_pair(model, prior, mocap, a.seed, a.options);
  if (a.model.empty()) save_model(join(a.out, "model.json"), model);
  if (a.mocap.empty()) save_mocap(join(a.out, "mocap.json"), mocap);
  save_colors(join(a.out, "colors.json"), pair.colors);
  const char* names[2] = {"a", "b"};
  for (int i = 0; i < 2; ++i) {
    const SceneView& v = pair.views[i];
    const std::string n = names[i];
    write_png(join(a.out, "image_" + n + ".png"), v.image);
    write_png(join(a.out, "mask_" + n + ".png"), v.mask);
    write_label_png(join(a.out, "parts_" + n + ".png"), v.parts);
    save_params(join(a.out, "params_" + n + ".json"), v.params);
    json joints = json::array();
    for (Eigen::Index j = 0; j < v.Y.rows(); ++j) joints.push_back({v.Y(j, 0), v.Y(j, 1), v.Y(j, 2)});
    write_text_file(join(a.out, "joints_" + n + ".json"), json{{"joints", joints}}.dump(2));
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Colored body-mesh recovery from image pairs", "consensus_mesh"};
  app.require_subcommand(1);
  app.allow_extras(false);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a procedural humanoid model, a preview render and MoCap poses");
  s->add_option("--seed", synth.seed, "Random seed");
  s->add_option("--vertices", synth.vertices, "Target vertex count")->check(CLI::Range(100, 100000));
  s->add_option("--joints", synth.joints, "Articulated joints (>= 15)")->check(CLI::Range(15, 64));
  s->add_option("--poses", synth.poses, "MoCap poses to write")->check(CLI::Range(64, 100000));
  s->add_option("--out", synth.out, "Output directory");

  RenderArgs render;
  auto* r = app.add_subcommand("render", "Render a posed model to PNG");
  r->add_option("--model", render.model, "Model JSON")->required()->check(CLI::ExistingFile);
  r->add_option("--params", render.params, "Parameter JSON")->required()->check(CLI::ExistingFile);
  r->add_option("--colors", render.colors, "Per-vertex colors JSON (flat gray when absent)")->check(CLI::ExistingFile);
  r->add_option("--resolution", render.resolution, "Image side in pixels");
  r->add_option("--out", render.out, "Output PNG")->required();
  r->add_option("--depth", render.depth, "Also write the depth map as PFM");
  r->add_option("--parts", render.parts, "Also write the part-label PNG");
  r->add_option("--mask", render.mask, "Also write the coverage mask PNG");

  RecoverArgs recover;
  auto* rc = app.add_subcommand("recover-colors", "Recover vertex colors from one image with known parameters");
  rc->add_option("--model", recover.model, "Model JSON")->required()->check(CLI::ExistingFile);
  rc->add_option("--params", recover.params, "Parameter JSON")->required()->check(CLI::ExistingFile);
  rc->add_option("--image", recover.image, "Input PNG")->required()->check(CLI::ExistingFile);
  rc->add_option("--out", recover.out, "Colored PLY")->required();
  rc->add_option("--report", recover.report, "JSON report of observed and unobserved groups");
  rc->add_option("--alpha", recover.alpha, "Depth sharpness of the visibility weights");
  rc->add_option("--gamma", recover.gamma, "Facing sharpness of the visibility weights");

  FitArgs fit;
  auto* f = app.add_subcommand("fit-pair", "Fit pose, shape and camera to two images of one person");
  f->add_option("--image-a", fit.image_a, "First image")->required()->check(CLI::ExistingFile);
  f->add_option("--image-b", fit.image_b, "Second image")->required()->check(CLI::ExistingFile);
  f->add_option("--mask-a", fit.mask_a, "Silhouette of the first image")->check(CLI::ExistingFile);
  f->add_option("--mask-b", fit.mask_b, "Silhouette of the second image")->check(CLI::ExistingFile);
  f->add_option("--keypoints-a", fit.keypoints_a, "2D joint targets (JSON rows) for the first image")
      ->check(CLI::ExistingFile);
  f->add_option("--keypoints-b", fit.keypoints_b, "2D joint targets (JSON rows) for the second image")
      ->check(CLI::ExistingFile);
  f->add_option("--model", fit.model, "Model JSON (procedural model when absent)")->check(CLI::ExistingFile);
  f->add_option("--mocap", fit.mocap, "MoCap JSON for the pose prior")->check(CLI::ExistingFile);
  f->add_option("--config", fit.config, "Config JSON")->check(CLI::ExistingFile);
  f->add_option("--seed", fit.seed, "Random seed");
  f->add_option("--iterations", fit.iterations, "Adam iterations per restart");
  f->add_option("--restarts", fit.restarts, "Random restarts");
  f->add_option("--lr", fit.lr, "Learning rate");
  f->add_option("--warmup", fit.warmup, "Iterations until the mean-shape weight reaches zero");
  f->add_option("--resolution", fit.resolution, "Fitting resolution (image height)");
  f->add_option("--alpha", fit.alpha, "Depth sharpness of the visibility weights");
  f->add_option("--gamma", fit.gamma, "Facing sharpness of the visibility weights");
  f->add_option("--w-color", fit.w_color, "Color consistency weight");
  f->add_option("--w-lambda", fit.w_lambda, "Weight of the intermediate-color term");
  f->add_option("--w-part", fit.w_part, "Part prototype weight");
  f->add_option("--w-shape", fit.w_shape, "Shape consistency weight");
  f->add_option("--w-silhouette", fit.w_silhouette, "Silhouette weight");
  f->add_option("--w-mean-shape", fit.w_mean_shape, "Initial mean-shape weight");
  f->add_option("--w-mv-mesh", fit.w_mv_mesh, "Multi-view mesh weight");
  f->add_option("--w-mv-pose", fit.w_mv_pose, "Multi-view pose weight");
  f->add_option("--w-kp2d", fit.w_kp2d, "2D keypoint weight");
  f->add_option("--out", fit.out, "Output directory");

  GradcheckArgs grad;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference check of the fitting gradient");
  g->add_option("--model", grad.model, "Model JSON (procedural model when absent)")->check(CLI::ExistingFile);
  g->add_option("--mocap", grad.mocap, "MoCap JSON for the pose prior")->check(CLI::ExistingFile);
  g->add_option("--seed", grad.options.seed, "Random seed");
  g->add_option("--configs", grad.options.configurations, "Random configurations");
  g->add_option("--step", grad.options.h, "Central-difference step h");
  g->add_option("--tol", grad.options.tolerance, "Relative error tolerance");
  g->add_option("--resolution", grad.options.resolution, "Image side in pixels");
  g->add_option("--out", grad.out, "Report path (stdout when absent)");
  g->add_flag("--inject-fault", grad.options.inject_fault)->group("");

  TransferArgs transfer;
  auto* t = app.add_subcommand("transfer", "Render the target pose with colors taken from the source image");
  t->add_option("--model", transfer.model, "Model JSON")->required()->check(CLI::ExistingFile);
  t->add_option("--source-image", transfer.source_image, "Source PNG")->required()->check(CLI::ExistingFile);
  t->add_option("--source-params", transfer.source_params, "Source parameters")->required()->check(CLI::ExistingFile);
  t->add_option("--target-params", transfer.target_params, "Target parameters")->required()->check(CLI::ExistingFile);
  t->add_option("--target-image", transfer.target_image, "Target PNG (colors for parts not transferred)")
      ->check(CLI::ExistingFile);
  t->add_option("--parts", transfer.parts,
                "Comma-separated part names, or all, none, upper_body, lower_body");
  t->add_option("--resolution", transfer.resolution, "Output side (defaults to the target image size, else 512)");
  t->add_option("--alpha", transfer.alpha, "Depth sharpness of the visibility weights");
  t->add_option("--gamma", transfer.gamma, "Facing sharpness of the visibility weights");
  t->add_option("--out", transfer.out, "Output PNG")->required();

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Pose and segmentation metrics");
  e->add_option("--model", eval.model, "Model JSON, needed for parameter files")->check(CLI::ExistingFile);
  e->add_option("--pred", eval.pred, "Predicted parameters or skeleton JSON")->check(CLI::ExistingFile);
  e->add_option("--gt", eval.gt, "Ground-truth parameters or skeleton JSON")->check(CLI::ExistingFile);
  e->add_option("--pred-labels", eval.pred_labels, "Predicted label PNG")->check(CLI::ExistingFile);
  e->add_option("--gt-labels", eval.gt_labels, "Ground-truth label PNG")->check(CLI::ExistingFile);
  e->add_option("--classes", eval.classes, "Foreground classes (labels 1..classes)");
  e->add_option("--out", eval.out, "Report path (stdout when absent)");

  SceneArgs scene;
  auto* sc = app.add_subcommand("scene", "Render a synthetic image pair with ground truth");
  sc->add_option("--model", scene.model, "Model JSON (procedural model when absent)")->check(CLI::ExistingFile);
  sc->add_option("--mocap", scene.mocap, "MoCap JSON")->check(CLI::ExistingFile);
  sc->add_option("--seed", scene.seed, "Random seed");
  sc->add_option("--resolution", scene.options.resolution, "Image side in pixels")->check(CLI::Range(8, 8192));
  sc->add_option("--max-yaw", scene.options.max_yaw, "Largest camera yaw in radians");
  sc->add_flag("--background", scene.options.background, "Smooth random background instead of black");
  sc->add_flag("--part-colors", scene.options.part_colors, "Clothing-style palette");
  sc->add_option("--out", scene.out, "Output directory");

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*r) return cmd_render(render);
    if (*rc) return cmd_recover(recover);
    if (*f) return cmd_fit_pair(fit);
    if (*g) return cmd_gradcheck(grad);
    if (*t) return cmd_transfer(transfer);
    if (*e) return cmd_eval(eval);
    if (*sc) return cmd_scene(scene);
  } catch (const Diverged& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kOptimizationFailure;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace consensus::cli
