#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "consensus_mesh/body_model.h"
#include "consensus_mesh/model_io.h"
#include "consensus_mesh/pose_prior.h"
#include "consensus_mesh/raster.h"

namespace consensus {

/// Everything a synthetic view renders from one set of parameters.
struct SceneView {
  ViewParams params;
  Vertices V;  // posed vertices
  Vertices Y;  // evaluation joints
  ImageRGB image;
  Mask mask;
  LabelMap parts;
  DepthMap depth;
};

/// Renders the colored body over `background` (black when null).
SceneView render_scene_view(const BodyModel& model, const ViewParams& params, const Colors& colors, ImageSize size,
                            const ImageRGB* background = nullptr);

struct ScenePairOptions {
  int resolution = 128;
  double beta_std = 0.5;
  double max_yaw = 0.3;       // camera yaw drawn from U(-max_yaw, max_yaw) around the front view
  bool background = false;    // smooth random background instead of black
  bool part_colors = false;   // clothing-style palette instead of the smooth one
};

/// Two views of one body (shared shape and colors) in two MoCap poses. The
/// poses are projected onto the prior so they are exactly representable.
struct ScenePair {
  Colors colors;
  ShapeVector beta = ShapeVector::Zero();
  std::array<SceneView, 2> views;
};

ScenePair synth_pair(const BodyModel& model, const PosePrior& prior, const std::vector<Eigen::VectorXd>& mocap,
                     std::uint64_t seed, const ScenePairOptions& options = {});

}  // namespace consensus
