#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "consensus_mesh/body_model.h"
#include "consensus_mesh/camera.h"
#include "consensus_mesh/color_recovery.h"
#include "consensus_mesh/model_io.h"
#include "consensus_mesh/objectives.h"
#include "consensus_mesh/pose_prior.h"
#include "consensus_mesh/raster.h"

namespace consensus {

struct FitConfig {
  int iterations = 500;
  double learning_rate = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int restarts = 4;
  int warmup = 200;  // mean-shape weight reaches 0 here
  std::uint64_t seed = 0;
  int resolution = 128;
  double init_noise = 0.1;  // uniform latent perturbation per restart
  // Steps ignore the depth term of the visibility weights (see LossOptions).
  bool depth_gradient = false;
};

inline constexpr double kBetaBound = 5.0;

/// Unconstrained variables of one image: phi = tanh(rho), s = exp(log_s).
struct ViewVariables {
  LatentVector rho = LatentVector::Zero();
  ShapeVector beta = ShapeVector::Zero();
  Eigen::Vector3d rot = Eigen::Vector3d::Zero();
  Eigen::Vector2d t = Eigen::Vector2d::Zero();
  double log_s = 0.0;

  LatentVector phi() const { return rho.array().tanh(); }
  CameraParams camera() const;
};

inline constexpr int kViewVariableCount = kLatentDim + kShapeDim + 6;
inline constexpr int kVariableCount = 2 * kViewVariableCount;

struct FitVariables {
  std::array<ViewVariables, 2> view;

  /// Layout per image: rho(32), beta(10), rot(3), t(2), log_s(1); image a first.
  Eigen::VectorXd pack() const;
  static FitVariables unpack(const Eigen::VectorXd& x);
  static std::vector<std::string> names();
};

struct FitView {
  ImageRGB image;
  Mask mask;            // empty when no silhouette is supplied
  FeatureMap features;  // builtin_features(image)
  Points2 keypoints;    // J x 2 landmark targets, empty when unused
};

struct FitProblem {
  BodyModel model;
  PosePrior prior;
  LossWeights weights;
  VisibilityOptions visibility;
  Eigen::Vector3d fallback = Eigen::Vector3d::Constant(0.5);
  double silhouette_tau = 0.25;  // pixels
  std::array<FitView, 2> views;
  Eigen::Vector3d init_rotation = Eigen::Vector3d(3.14159265358979323846, 0.0, 0.0);  // front view
  std::optional<FitVariables> init;
};

/// Builds a problem with both images (and masks when given) resampled to the
/// fitting resolution (image height) and their feature maps computed.
FitProblem make_fit_problem(const BodyModel& model, const PosePrior& prior, const ImageRGB& image_a,
                            const ImageRGB& image_b, const Mask* mask_a, const Mask* mask_b, int resolution);

/// State that is held fixed for finite-difference checks: the rasterized depth
/// maps and the observed flags of groups and parts.
struct FrozenState {
  std::array<DepthMap, 2> depth;
  std::array<std::vector<char>, 2> groups;
  std::array<std::vector<char>, 2> parts;
};

struct LossTerms {
  double total = 0.0;
  double color = 0.0;
  double part = 0.0;
  double shape = 0.0;
  double silhouette = 0.0;
  double mean_shape = 0.0;
  double mv_mesh = 0.0;
  double mv_pose = 0.0;
  double kp2d = 0.0;
  bool part_dropped = false;  // no part observed in both images
};

struct ViewState {
  Eigen::VectorXd theta;
  Vertices V;
  Vertices Y;
  Points2 v;
  Eigen::VectorXd Z;
  Eigen::VectorXd W;
  ColoredMesh mesh;
};

struct LossEvaluation {
  LossTerms terms;
  Eigen::VectorXd gradient;  // empty unless requested
  std::array<ViewState, 2> views;
};

struct LossOptions {
  int warmup = 200;
  bool with_gradient = true;
  // When false, exp(-alpha D) is held constant in the backward pass. With the
  // depth map detached, the D path pushes visible vertices off their own
  // surface, which makes optimization drift; the full gradient is kept for
  // finite-difference checks.
  bool depth_gradient = true;
  const FrozenState* frozen = nullptr;
  FrozenState* capture = nullptr;
};

LossEvaluation total_loss(const FitProblem& problem, const FitVariables& variables, int iter,
                          const LossOptions& options = {});

struct FitResult {
  FitVariables variables;
  std::array<ViewParams, 2> params;
  LossTerms final_losses;
  std::array<ViewState, 2> views;
  std::vector<LossTerms> trace;
  int restart = 0;
  std::vector<double> restart_losses;  // NaN for diverged restarts
};

/// Default initialization before the per-restart latent perturbation.
FitVariables initial_variables(const FitProblem& problem);

/// Runs config.restarts Adam runs and keeps the lowest final loss (ties go to
/// the lowest restart index). Throws Diverged when every restart diverges.
FitResult fit_pair(const FitProblem& problem, const FitConfig& config);

std::string fit_result_to_json(const FitResult& result);
std::string trace_to_csv(const std::vector<LossTerms>& trace);

struct GradCheckReport {
  std::vector<std::string> names;
  Eigen::VectorXd analytic;
  Eigen::VectorXd numeric;
  Eigen::VectorXd rel_error;  // |a - n| / (|a| + |n| + 1e-8)
  double max_rel_error = 0.0;
  bool pass = false;
};

using GradientFunction = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

/// Central differences of f against its analytic gradient.
GradCheckReport finite_diff_check(const GradientFunction& f, const Eigen::VectorXd& x, double h = 1e-4,
                                  double tolerance = 1e-3);

/// Checks total_loss over every fit variable with depth maps and observed
/// flags frozen at x.
GradCheckReport finite_diff_check(const FitProblem& problem, const FitVariables& x, double h = 1e-4,
                                  double tolerance = 1e-3, int iter = 0);

/// Parameters of one image in file form.
ViewParams view_params(const FitProblem& problem, const ViewVariables& v);

}  // namespace consensus
