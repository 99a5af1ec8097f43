#include "consensus_mesh/scene.h"

#include <algorithm>

#include <Eigen/Geometry>

#include "consensus_mesh/camera.h"
#include "consensus_mesh/errors.h"
#include "consensus_mesh/synth_model.h"

namespace consensus {

namespace {

// Front view turned by `yaw` about the body's vertical axis.
Eigen::Vector3d yawed_front_view(double yaw) {
  const Eigen::Vector3d front = front_view_rotation();
  const Eigen::Matrix3d R = Eigen::AngleAxisd(front.norm(), front.normalized()).toRotationMatrix() *
                            Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()).toRotationMatrix();
  const Eigen::AngleAxisd aa(R);
  return aa.angle() * aa.axis();
}

}  // namespace

SceneView render_scene_view(const BodyModel& model, const ViewParams& params, const Colors& colors, ImageSize size,
                            const ImageRGB* background) {
  if (colors.rows() != model.num_vertices()) throw InvalidArgument("one color per vertex is required");
  if (background && !(background->size() == size)) throw ResolutionMismatch("background size differs from the render");
  SceneView view;
  view.params = params;
  view.V = skin(model, params.beta, params.theta).vertices;
  view.Y = regress_joints(model, view.V);
  const Projection proj = project(params.camera, view.V);
  ColoredRender render = render_colored(proj.v, proj.Z, model.faces, colors, size);
  view.image = std::move(render.image);
  view.mask = std::move(render.mask);
  if (background) {
    for (int y = 0; y < size.height; ++y)
      for (int x = 0; x < size.width; ++x)
        if (view.mask.at(x, y) == 0.0)
          for (int c = 0; c < 3; ++c) view.image.at(x, y, c) = background->at(x, y, c);
  }
  view.parts = render_part_labels(proj.v, proj.Z, model.faces, model.parts, size);
  view.depth = rasterize_depth(proj.v, proj.Z, model.faces, size);
  return view;
}

ScenePair synth_pair(const BodyModel& model, const PosePrior& prior, const std::vector<Eigen::VectorXd>& mocap,
                     std::uint64_t seed, const ScenePairOptions& options) {
  if (mocap.size() < 2) throw InvalidArgument("synth_pair needs at least two MoCap poses");
  if (options.resolution <= 0) throw InvalidArgument("resolution must be positive");
  Rng rng(seed);
  ScenePair pair;
  pair.colors = options.part_colors ? part_palette(model, seed) : smooth_palette(model, seed);
  for (int c = 0; c < kShapeDim; ++c) pair.beta(c) = options.beta_std * rng.normal();
  const ImageSize size{options.resolution, options.resolution};
  const int first = static_cast<int>(rng.uniform() * mocap.size());
  int second = static_cast<int>(rng.uniform() * (mocap.size() - 1));
  if (second >= first) ++second;
  const int picks[2] = {first, second};
  for (int i = 0; i < 2; ++i) {
    ViewParams params;
    const LatentVector phi = encode_pose(prior, mocap[picks[i]]).cwiseMax(-0.95).cwiseMin(0.95);
    params.phi = phi;
    params.theta = decode_pose(prior, phi);
    params.beta = pair.beta;
    params.camera.rot = yawed_front_view(rng.uniform(-options.max_yaw, options.max_yaw));
    params.camera.s = rng.uniform(0.9, 1.1);
    params.camera.t = Eigen::Vector2d(rng.uniform(-0.1, 0.1), rng.uniform(-0.05, 0.05));
    ImageRGB background;
    if (options.background) background = synth_background(size.width, size.height, seed * 2 + i + 1);
    pair.views[i] = render_scene_view(model, params, pair.colors, size, options.background ? &background : nullptr);
  }
  return pair;
}

}  // namespace consensus
