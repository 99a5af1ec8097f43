#include "consensus_mesh/appearance.h"

#include "consensus_mesh/camera.h"
#include "consensus_mesh/errors.h"

namespace consensus {

Recovery recover_colors(const BodyModel& model, const ViewParams& params, const ImageRGB& image,
                        const VisibilityOptions& options, const Eigen::Vector3d& fallback) {
  if (image.empty()) throw InvalidArgument("empty image");
  if (params.theta.size() != model.pose_dim()) throw InvalidArgument("theta size does not match the model");
  validate(params.camera);
  Recovery r;
  r.V = skin(model, params.beta, params.theta).vertices;
  const Projection proj = project(params.camera, r.V);
  const Eigen::VectorXd N = camera_normals(params.camera, vertex_normals(model, r.V));
  const DepthMap depth = rasterize_depth(proj.v, proj.Z, model.faces, image.size());
  const VisibilityWeights vis = visibility(depth, proj.v, proj.Z, N, options);
  r.W = vis.W;
  const PickedColors picked = pick_colors(image, proj.v, vis.W);
  r.mesh = propagate_symmetry(picked.C_tilde, vis.W, model.symmetry, fallback);
  return r;
}

std::vector<char> select_parts(const PartTable& parts, const std::vector<std::string>& names) {
  std::vector<char> selected(parts.size(), 0);
  for (const auto& name : names) {
    if (name == "all") {
      std::fill(selected.begin(), selected.end(), 1);
    } else if (name == "none") {
    } else if (name == "upper_body" || name == "lower_body") {
      const bool legs = name == "lower_body";
      for (int p = 0; p < parts.size(); ++p)
        if ((parts.names[p].find("leg") != std::string::npos) == legs) selected[p] = 1;
    } else {
      const int p = parts.find(name);
      if (p < 0) throw InvalidArgument("unknown part: " + name);
      selected[p] = 1;
    }
  }
  return selected;
}

Colors merge_part_colors(const PartTable& parts, const std::vector<char>& selected, const Colors& source,
                         const Colors& target) {
  if (source.rows() != target.rows() || static_cast<int>(parts.part_of.size()) != source.rows())
    throw InvalidArgument("color tables do not match the part table");
  Colors out = target;
  for (Eigen::Index k = 0; k < out.rows(); ++k)
    if (selected[parts.part_of[k]]) out.row(k) = source.row(k);
  return out;
}

ImageRGB render_with_colors(const BodyModel& model, const ViewParams& params, const Colors& colors, ImageSize size) {
  validate(params.camera);
  const Vertices V = skin(model, params.beta, params.theta).vertices;
  const Projection proj = project(params.camera, V);
  return render_colored(proj.v, proj.Z, model.faces, colors, size).image;
}

}  // namespace consensus
