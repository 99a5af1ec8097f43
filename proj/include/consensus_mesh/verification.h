#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "consensus_mesh/body_model.h"
#include "consensus_mesh/fitter.h"
#include "consensus_mesh/pose_prior.h"

namespace consensus {

struct GradientSuiteOptions {
  int configurations = 5;
  double h = 1e-4;
  double tolerance = 1e-3;
  int resolution = 128;
  std::uint64_t seed = 0;
  int iteration = 50;         // inside the mean-shape warmup so that term is live
  bool inject_fault = false;  // negative control: corrupts one analytic component
};

struct GradientSuiteResult {
  std::vector<GradCheckReport> reports;
  double max_rel_error = 0.0;
  bool pass = false;
};

/// Finite-difference checks of total_loss over every fit variable at random
/// configurations near synthetic ground truth, with all loss terms enabled.
GradientSuiteResult gradient_suite(const BodyModel& model, const PosePrior& prior,
                                   const std::vector<Eigen::VectorXd>& mocap, const GradientSuiteOptions& options);

std::string gradient_suite_to_json(const GradientSuiteResult& result, const GradientSuiteOptions& options);

}  // namespace consensus
