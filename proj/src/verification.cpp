#include "consensus_mesh/verification.h"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "consensus_mesh/camera.h"
#include "consensus_mesh/scene.h"
#include "consensus_mesh/synth_model.h"

namespace consensus {

GradientSuiteResult gradient_suite(const BodyModel& model, const PosePrior& prior,
                                   const std::vector<Eigen::VectorXd>& mocap, const GradientSuiteOptions& options) {
  GradientSuiteResult result;
  result.pass = true;
  for (int c = 0; c < options.configurations; ++c) {
    ScenePairOptions scene_options;
    scene_options.resolution = options.resolution;
    const ScenePair scene = synth_pair(model, prior, mocap, options.seed * 1000 + c, scene_options);
    FitProblem problem = make_fit_problem(model, prior, scene.views[0].image, scene.views[1].image,
                                          &scene.views[0].mask, &scene.views[1].mask, options.resolution);
    problem.weights.mv_mesh = 0.1;
    problem.weights.mv_pose = 0.1;
    problem.weights.kp2d = 0.1;

    Rng rng(options.seed * 1000 + c + 7919);
    FitVariables x;
    for (int i = 0; i < 2; ++i) {
      const ViewParams& truth = scene.views[i].params;
      problem.views[i].keypoints = project(truth.camera, scene.views[i].Y).v;
      ViewVariables& v = x.view[i];
      for (int k = 0; k < kLatentDim; ++k)
        v.rho(k) = std::atanh(std::clamp((*truth.phi)(k) + rng.uniform(-0.2, 0.2), -0.95, 0.95));
      for (int k = 0; k < kShapeDim; ++k) v.beta(k) = truth.beta(k) + 0.2 * rng.normal();
      for (int k = 0; k < 3; ++k) v.rot(k) = truth.camera.rot(k) + rng.uniform(-0.05, 0.05);
      for (int k = 0; k < 2; ++k) v.t(k) = truth.camera.t(k) + rng.uniform(-0.02, 0.02);
      v.log_s = std::log(truth.camera.s) + rng.uniform(-0.05, 0.05);
    }

    GradCheckReport report;
    if (options.inject_fault) {
      FrozenState frozen;
      LossOptions capture;
      capture.capture = &frozen;
      capture.with_gradient = false;
      total_loss(problem, x, options.iteration, capture);
      auto f = [&](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
        LossOptions o;
        o.frozen = &frozen;
        o.with_gradient = grad != nullptr;
        LossEvaluation e = total_loss(problem, FitVariables::unpack(z), options.iteration, o);
        if (grad) {
          *grad = e.gradient;
          (*grad)(kViewVariableCount - 1) *= 1.5;  // image a's log-scale component
        }
        return e.terms.total;
      };
      report = finite_diff_check(f, x.pack(), options.h, options.tolerance);
      report.names = FitVariables::names();
    } else {
      report = finite_diff_check(problem, x, options.h, options.tolerance, options.iteration);
    }
    result.max_rel_error = std::max(result.max_rel_error, report.max_rel_error);
    result.pass = result.pass && report.pass;
    result.reports.push_back(std::move(report));
  }
  return result;
}

std::string gradient_suite_to_json(const GradientSuiteResult& result, const GradientSuiteOptions& options) {
  nlohmann::json j;
  j["h"] = options.h;
  j["tolerance"] = options.tolerance;
  j["resolution"] = options.resolution;
  j["seed"] = options.seed;
  j["max_rel_error"] = result.max_rel_error;
  j["pass"] = result.pass;
  nlohmann::json configs = nlohmann::json::array();
  for (const auto& r : result.reports) {
    Eigen::Index worst = 0;
    if (r.rel_error.size() > 0) r.rel_error.maxCoeff(&worst);
    nlohmann::json failing = nlohmann::json::array();
    for (Eigen::Index i = 0; i < r.rel_error.size(); ++i)
      if (!(r.rel_error(i) < options.tolerance))
        failing.push_back({{"variable", r.names[i]},
                           {"analytic", r.analytic(i)},
                           {"numeric", r.numeric(i)},
                           {"rel_error", r.rel_error(i)}});
    configs.push_back({{"max_rel_error", r.max_rel_error},
                       {"worst_variable", r.names.empty() ? "" : r.names[worst]},
                       {"pass", r.pass},
                       {"failing", std::move(failing)}});
  }
  j["configurations"] = std::move(configs);
  return j.dump(2);
}

}  // namespace consensus
